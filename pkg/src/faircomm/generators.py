"""Seeded synthetic networks with group labels.

Structure and colouring use independent random streams, so one structure seed
can carry many colourings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, build_graph

REWIRE_RETRIES = 100


@dataclass
class GeneratorConfig:
    kind: str = "rewired_cliques"
    n: int = 1000
    p: float = 0.001
    L: int = 10
    l: int = 10
    p_rewire: float = 0.1
    p_groups: tuple[float, ...] = (0.5, 0.5)
    coloring_mode: str = "individual"
    structure_seed: int = 0
    coloring_seed: int = 0

    def __post_init__(self):
        self.kind = {"er": "er", "rewired_cliques": "rewired_cliques",
                     "cliques": "rewired_cliques"}.get(self.kind, self.kind)
        if self.kind not in ("er", "rewired_cliques"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.coloring_mode not in ("individual", "clique"):
            raise ValueError(f"unknown coloring mode {self.coloring_mode!r}")
        self.p_groups = tuple(float(x) for x in self.p_groups)
        if len(self.p_groups) < 1 or any(x < 0 for x in self.p_groups):
            raise ValueError(f"invalid group probabilities {self.p_groups}")
        if abs(sum(self.p_groups) - 1.0) > 1e-9:
            raise ValueError(f"group probabilities sum to {sum(self.p_groups)}, not 1")
        if self.kind == "er":
            if self.n < 1:
                raise ValueError("n must be positive")
            if not 0.0 <= self.p <= 1.0:
                raise ValueError(f"edge probability {self.p} outside [0, 1]")
            if self.coloring_mode != "individual":
                raise ValueError("ER graphs only support individual colouring")
        else:
            if self.L < 2 or self.l < 2:
                raise ValueError("need L >= 2 cliques of size l >= 2")
            if not 0.0 <= self.p_rewire <= 1.0:
                raise ValueError(f"rewire probability {self.p_rewire} outside [0, 1]")
        if self.structure_seed < 0 or self.coloring_seed < 0:
            raise ValueError("seeds must be non-negative")

    @property
    def K(self) -> int:
        return len(self.p_groups)

    @property
    def p_sensitive(self) -> float:
        return min(self.p_groups)

    @property
    def node_count(self) -> int:
        return self.n if self.kind == "er" else self.L * self.l


@dataclass
class RewireStats:
    considered: int = 0
    rewired: int = 0
    skipped: int = 0
    rewired_edges: list[tuple[int, int]] = field(default_factory=list)


def _color(cfg: GeneratorConfig, n: int, block: int = 1) -> list[int]:
    rng = np.random.default_rng([cfg.coloring_seed, 1])
    draws = rng.choice(cfg.K, size=n // block, p=np.asarray(cfg.p_groups)) + 1
    return np.repeat(draws, block).tolist()


def er_edges(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    """Bernoulli(p) over all unordered pairs, via geometric gap sampling."""
    total = n * (n - 1) // 2
    if p <= 0.0 or total == 0:
        return []
    if p >= 1.0:
        idx = np.arange(total, dtype=np.int64)
    else:
        rng = np.random.default_rng([seed, 0])
        chunks = []
        pos = -1
        batch = max(1024, int(total * p * 1.1) + 10 * int(math.sqrt(total * p)) + 16)
        while True:
            gaps = rng.geometric(p, size=batch).astype(np.int64)
            positions = pos + np.cumsum(gaps)
            inside = positions[positions < total]
            chunks.append(inside)
            if len(inside) < len(positions):
                break
            pos = int(positions[-1])
        idx = np.concatenate(chunks)
    # linear index over pairs (i, j), i < j, enumerated row by row
    i = n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5).astype(np.int64)
    row_start = i * (2 * n - i - 1) // 2
    j = idx - row_start + i + 1
    # guard against floating error in the square root
    low = j <= i
    while low.any():
        i[low] -= 1
        row_start = i * (2 * n - i - 1) // 2
        j = idx - row_start + i + 1
        low = j <= i
    high = j >= n
    while high.any():
        i[high] += 1
        row_start = i * (2 * n - i - 1) // 2
        j = idx - row_start + i + 1
        high = j >= n
    return list(zip(i.tolist(), j.tolist()))


def generate_er(cfg: GeneratorConfig) -> Graph:
    if cfg.kind != "er":
        raise ValueError("config is not of kind 'er'")
    edges = er_edges(cfg.n, cfg.p, cfg.structure_seed)
    return build_graph(edges, _color(cfg, cfg.n), K=cfg.K)


def clique_edges(cfg: GeneratorConfig) -> tuple[list[tuple[int, int]], RewireStats]:
    """Planted cliques with each intra-clique edge rewired at most once.

    A rewired edge keeps its first endpoint and draws the second uniformly
    from the other cliques; draws that hit an existing edge are retried, and
    after ``REWIRE_RETRIES`` failures the edge stays where it is.
    """
    L, l = cfg.L, cfg.l
    n = L * l
    rng = np.random.default_rng([cfg.structure_seed, 0])
    original = [(c * l + a, c * l + b) for c in range(L) for a in range(l) for b in range(a + 1, l)]
    present = set(original)
    stats = RewireStats()
    for u, v in original:
        stats.considered += 1
        if cfg.p_rewire <= 0.0 or rng.random() >= cfg.p_rewire:
            continue
        clique = u // l
        for _ in range(REWIRE_RETRIES):
            w = int(rng.integers(n - l))
            if w >= clique * l:
                w += l
            edge = (u, w) if u < w else (w, u)
            if edge not in present:
                present.discard((u, v))
                present.add(edge)
                stats.rewired += 1
                stats.rewired_edges.append(edge)
                break
        else:
            stats.skipped += 1
    return sorted(present), stats


def generate_rewired_cliques(cfg: GeneratorConfig) -> Graph:
    if cfg.kind != "rewired_cliques":
        raise ValueError("config is not of kind 'rewired_cliques'")
    edges, _ = clique_edges(cfg)
    n = cfg.L * cfg.l
    block = cfg.l if cfg.coloring_mode == "clique" else 1
    return build_graph(edges, _color(cfg, n, block), K=cfg.K)


def generate(cfg: GeneratorConfig) -> Graph:
    if cfg.kind == "er":
        return generate_er(cfg)
    return generate_rewired_cliques(cfg)
