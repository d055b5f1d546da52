"""Two-phase fairness-aware Louvain optimisation.

Phase one moves single nodes of the input graph for modularity alone. Every
later level aggregates the current communities into meta-nodes and moves
meta-nodes for the weighted objective ``alpha * Q + (1 - alpha) * F``. The
outer loop stops once a level improves the objective by no more than
``theta``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .dataio import RunRecord
from .graph import Graph, Partition, aggregate, flatten
from .metrics import (
    BALANCE, PROP_BALANCE, FairnessContext, community_contribution, expected_prop_balance,
    global_fairness,
    modularity, modularity_gain, normalize_metric, objective,
)

log = logging.getLogger(__name__)

DELTA_TOLERANCE = 1e-9
CANDIDATE_MODES = ("all", "neighbors")


class InvariantViolation(RuntimeError):
    """An incremental quantity disagreed with its from-scratch value."""


@dataclass
class OptimizerConfig:
    alpha: float = 0.5
    theta: float = 1e-6
    metric: str = PROP_BALANCE
    seed: int = 0
    max_levels: int = 64
    validate: bool = False
    candidates: str = "all"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        if self.max_levels < 1:
            raise ValueError("max_levels must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.metric = normalize_metric(self.metric)
        if self.candidates not in CANDIDATE_MODES:
            raise ValueError(f"candidates must be one of {CANDIDATE_MODES}, got {self.candidates!r}")


@dataclass
class ValidationReport:
    ok: bool
    problems: list[str] = field(default_factory=list)
    modularity: float | None = None
    fairness: float | None = None

    def __bool__(self):
        return self.ok


def level_rng(seed, level: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng([int(seed), level])


def _objective_from_scratch(g, assignment, ctx, alpha):
    p = Partition(g, assignment)
    q = modularity(g, p)
    if ctx is None or alpha == 1.0:
        return q
    return objective(q, global_fairness(p, ctx), alpha)


def _move_nodes(g: Graph, part: Partition, rng, alpha=1.0, ctx=None, validate=False,
                candidates="all"):
    """Greedy local moving until a full sweep moves nothing.

    Each node goes to the community (or a fresh one) with the largest strictly
    positive gain; equal gains go to the lowest community id. With fairness
    in play and ``candidates="all"`` every existing community is a candidate,
    since a fair merge need not share an edge. Without fairness a
    non-adjacent community never beats a fresh one, so only neighbours are
    scanned. Returns the number of sweeps performed.
    """
    adj = g.adj
    degrees = g.degrees
    two_m = g.total_weight
    comm = part.assignment
    tot = part.community_degree
    members = part.community_members_count
    fair = ctx is not None and alpha < 1.0
    if fair:
        beta = 1.0 - alpha
        n_orig = ctx.n
        weights = g.node_weights
        gcounts = g.group_counts
        sizes = part.community_node_weight
        counts = part.community_group_counts
        contrib = {c: community_contribution(ctx, counts[c], sizes[c]) for c in sizes}
    scan_all = fair and candidates == "all"

    sweeps = 0
    while True:
        sweeps += 1
        moved = 0
        for v in rng.permutation(g.n).tolist():
            s = comm[v]
            links: dict[int, float] = {}
            for u, w in adj[v].items():
                c = comm[u]
                links[c] = links.get(c, 0.0) + w
            k_v = degrees[v]
            k_s = links.pop(s, 0.0)
            if scan_all:
                for c in members:
                    if c != s and c not in links:
                        links[c] = 0.0
            tot_s = tot[s] - k_v
            if fair:
                wv = weights[v]
                gv = gcounts[v]
                src_rest = [a - b for a, b in zip(counts[s], gv)]
                src_after = community_contribution(ctx, src_rest, sizes[s] - wv)
                src_before = contrib[s]

            checks = []
            best, best_gain = s, 0.0
            for c, k_c in links.items():
                gain = modularity_gain(two_m, k_v, k_s, k_c, tot_s, tot[c])
                if fair:
                    after = src_after + community_contribution(
                        ctx, [a + b for a, b in zip(counts[c], gv)], sizes[c] + wv)
                    before = src_before + contrib[c]
                    gain = alpha * gain + beta * ((after - before) / n_orig)
                if validate:
                    checks.append((c, gain))
                if gain > best_gain or (gain == best_gain and gain > 0.0 and c < best):
                    best, best_gain = c, gain
            new_id = None
            if members[s] > 1:
                new_id = part.peek_new_id()
                gain = modularity_gain(two_m, k_v, k_s, 0.0, tot_s, 0.0)
                if fair:
                    after = src_after + community_contribution(ctx, list(gv), wv)
                    before = src_before + 0.0
                    gain = alpha * gain + beta * ((after - before) / n_orig)
                if validate:
                    checks.append((None, gain))
                if gain > best_gain or (gain == best_gain and gain > 0.0 and new_id < best):
                    best, best_gain = new_id, gain

            if validate:
                _check_candidates(g, part, v, checks, alpha, ctx if fair else None)

            if best != s:
                target = part.move(v, None if best == new_id else best)
                moved += 1
                if fair:
                    contrib[target] = community_contribution(ctx, counts[target], sizes[target])
                    if s in sizes:
                        contrib[s] = src_after
                    else:
                        contrib.pop(s, None)
        if moved == 0:
            return sweeps


def _fair_contrib(counts, sizes, K, metric, exp_table):
    """Size times fairness for each row of ``counts`` (one community per row)."""
    counts = counts.astype(np.float64)
    rest = sizes[:, None] - counts
    ratios = np.full_like(counts, np.inf)
    np.divide(counts, rest, out=ratios, where=rest > 0)
    best = ratios.min(axis=1)
    score = np.where(np.isinf(best), 0.0, (K - 1) * best)
    if metric != BALANCE:
        # the source row of a scan can exceed n; its gain is masked anyway
        expected = exp_table[np.minimum(sizes, len(exp_table) - 1)]
        score = np.minimum(1.0, 1.0 - (expected - score))
    return np.where(sizes > 0, sizes * score, 0.0)


def _move_nodes_all(g: Graph, part: Partition, rng, alpha, ctx, validate=False):
    """Local moving where every existing community is a candidate.

    Same move rule as ``_move_nodes``; the candidate scan is vectorised over
    the live community ids. Each scan also scores the shrunken source and a
    fresh singleton, so stored contributions are exactly the values used in
    the gains and a move followed by its reverse nets to zero.
    """
    K = ctx.K
    metric = ctx.metric
    beta = 1.0 - alpha
    n_orig = ctx.n
    two_m = g.total_weight
    adj = g.adj
    degrees = g.degrees
    comm = part.assignment
    members = part.community_members_count
    exp_table = None
    if metric == PROP_BALANCE:
        exp_table = np.array([expected_prop_balance(s, ctx) for s in range(n_orig + 1)])

    cap = max(part.community_ids(), default=0) + g.n + 1
    tot = np.zeros(cap)
    cnt = np.zeros((cap, K), dtype=np.int64)
    size = np.zeros(cap, dtype=np.int64)
    alive = np.zeros(cap, dtype=bool)
    for c in part.community_ids():
        tot[c] = part.community_degree[c]
        cnt[c] = part.community_group_counts[c]
        size[c] = part.community_node_weight[c]
        alive[c] = True
    contrib = _fair_contrib(cnt, size, K, metric, exp_table)
    gvec = np.array([list(x) for x in g.group_counts], dtype=np.int64).reshape(g.n, K)
    weights = np.asarray(g.node_weights, dtype=np.int64)
    link = np.zeros(cap)
    ids = np.flatnonzero(alive)

    sweeps = 0
    while True:
        sweeps += 1
        moved = 0
        for v in rng.permutation(g.n).tolist():
            s = comm[v]
            k_v = degrees[v]
            k_s = 0.0
            touched = []
            for u, w in adj[v].items():
                c = comm[u]
                if c == s:
                    k_s += w
                else:
                    touched.append(c)
                    link[c] += w
            tot_s = tot[s] - k_v
            gv = gvec[v]
            wv = weights[v]

            m = len(ids)
            rows = np.empty((m + 2, K), dtype=np.int64)
            rows[:m] = cnt[ids]
            rows[:m] += gv
            rows[m] = cnt[s] - gv
            rows[m + 1] = gv
            row_sizes = np.empty(m + 2, dtype=np.int64)
            row_sizes[:m] = size[ids]
            row_sizes[:m] += wv
            row_sizes[m] = size[s] - wv
            row_sizes[m + 1] = wv
            after = _fair_contrib(rows, row_sizes, K, metric, exp_table)
            src_after = after[m]
            src_before = contrib[s]

            dq = 2.0 * (two_m * (link[ids] - k_s) - k_v * (tot[ids] - tot_s)) / (two_m * two_m)
            gain = alpha * dq + beta * (((src_after + after[:m]) - (src_before + contrib[ids])) / n_orig)
            s_pos = int(np.searchsorted(ids, s))
            gain[s_pos] = -np.inf
            for c in touched:
                link[c] = 0.0

            best, best_gain, best_after = s, 0.0, 0.0
            i = int(np.argmax(gain))
            if gain[i] > 0.0:
                best, best_gain, best_after = int(ids[i]), float(gain[i]), after[i]
            new_id = None
            if members[s] > 1:
                new_id = part.peek_new_id()
                new_dq = modularity_gain(two_m, k_v, k_s, 0.0, tot_s, 0.0)
                new_gain = alpha * new_dq + beta * (((src_after + after[m + 1]) - (src_before + 0.0)) / n_orig)
                if new_gain > best_gain or (new_gain == best_gain and new_gain > 0.0 and new_id < best):
                    best, best_gain, best_after = new_id, new_gain, after[m + 1]

            if validate:
                checks = [(int(c), float(x)) for c, x in zip(ids, gain) if c != s]
                if new_id is not None:
                    checks.append((None, float(new_gain)))
                _check_candidates(g, part, v, checks, alpha, ctx)

            if best != s:
                target = part.move(v, None if best == new_id else best)
                moved += 1
                tot[s] -= k_v
                cnt[s] -= gv
                size[s] -= wv
                tot[target] += k_v
                cnt[target] += gv
                size[target] += wv
                contrib[target] = best_after
                if s not in members:
                    contrib[s] = 0.0
                    alive[s] = False
                else:
                    contrib[s] = src_after
                if s not in members or not alive[target]:
                    alive[target] = True
                    ids = np.flatnonzero(alive)
        if moved == 0:
            return sweeps


def _check_candidates(g, part, v, candidates, alpha, ctx):
    base = list(part.assignment)
    before = _objective_from_scratch(g, base, ctx, alpha)
    for target, gain in candidates:
        moved = list(base)
        moved[v] = part.peek_new_id() if target is None else target
        after = _objective_from_scratch(g, moved, ctx, alpha)
        if abs((after - before) - gain) > DELTA_TOLERANCE:
            raise InvariantViolation(
                f"incremental gain {gain!r} for moving node {v} to {target} differs "
                f"from recomputed {after - before!r}")


def step1(g: Graph, seed=0, validate: bool = False) -> tuple[Partition, float]:
    """Modularity-only local moving on the full graph, from singletons."""
    if g.total_weight <= 0:
        raise ValueError("graph has no edge weight; modularity is undefined")
    part = Partition.singletons(g)
    _move_nodes(g, part, level_rng(seed, 0), validate=validate)
    return part, modularity(g, part)


def step2(g: Graph, ctx: FairnessContext, alpha: float, seed=0,
          validate: bool = False, candidates: str = "all") -> tuple[Partition, float]:
    """Objective-driven local moving of (meta-)nodes, from singletons."""
    objective(0.0, 0.0, alpha)
    part = Partition.singletons(g)
    if candidates == "all" and alpha < 1.0:
        _move_nodes_all(g, part, level_rng(seed, 0), alpha, ctx, validate=validate)
    else:
        _move_nodes(g, part, level_rng(seed, 0), alpha=alpha, ctx=ctx, validate=validate,
                    candidates="neighbors")
    q = modularity(g, part)
    return part, objective(q, global_fairness(part, ctx), alpha)


def validate_partition(g: Graph, p: Partition, ctx: FairnessContext | None = None,
                       tracked_q: float | None = None, tracked_f: float | None = None,
                       tol: float = DELTA_TOLERANCE) -> ValidationReport:
    """Recompute everything about ``p`` from scratch and compare."""
    problems = []
    if len(p.assignment) != g.n:
        return ValidationReport(False, [f"assignment covers {len(p.assignment)} of {g.n} nodes"])
    fresh = Partition(g, p.assignment)
    if set(fresh.community_members_count) != set(p.community_members_count):
        problems.append("tracked community ids differ from the assignment")
    for c, size in p.community_members_count.items():
        if size <= 0 or p.community_node_weight.get(c, 0) <= 0:
            problems.append(f"community {c} is empty")
    for c in fresh.community_members_count:
        if list(p.community_group_counts.get(c, [])) != fresh.community_group_counts[c]:
            problems.append(f"group counts of community {c} are "
                            f"{p.community_group_counts.get(c)}, expected "
                            f"{fresh.community_group_counts[c]}")
        if p.community_node_weight.get(c) != fresh.community_node_weight[c]:
            problems.append(f"node weight of community {c} is wrong")
        if abs(p.community_degree.get(c, 0.0) - fresh.community_degree[c]) > tol:
            problems.append(f"degree sum of community {c} is wrong")
    totals = [0] * g.K
    for counts in p.community_group_counts.values():
        for j, x in enumerate(counts):
            totals[j] += x
    expected = tuple(ctx.group_sizes) if ctx is not None else g.group_sizes
    if tuple(totals) != expected:
        problems.append(f"group counts sum to {tuple(totals)}, expected {expected}")

    q = modularity(g, fresh) if g.total_weight > 0 else None
    f = global_fairness(fresh, ctx) if ctx is not None else None
    if tracked_q is not None and q is not None and abs(tracked_q - q) > tol:
        problems.append(f"tracked modularity {tracked_q!r} != recomputed {q!r}")
    if tracked_f is not None and f is not None and abs(tracked_f - f) > tol:
        problems.append(f"tracked fairness {tracked_f!r} != recomputed {f!r}")
    return ValidationReport(not problems, problems, q, f)


def _require(report: ValidationReport, where: str):
    if not report.ok:
        raise InvariantViolation(f"{where}: " + "; ".join(report.problems))


def mouflon(g: Graph, cfg: OptimizerConfig | None = None) -> tuple[Partition, RunRecord]:
    """Run the full optimisation and return the partition of the input nodes."""
    cfg = cfg or OptimizerConfig()
    if g.total_weight <= 0:
        raise ValueError("graph has no edge weight; modularity is undefined")
    ctx = FairnessContext.from_graph(g, cfg.metric)
    alpha = cfg.alpha
    started = time.perf_counter()

    part, opt_new = step1(g, level_rng(cfg.seed, 0), validate=cfg.validate)
    if cfg.validate:
        _require(validate_partition(g, part, ctx, tracked_q=opt_new), "after phase one")
    levels = [part]
    graph = g
    level = 0
    hit_cap = False
    while True:
        opt = opt_new
        if level >= cfg.max_levels:
            hit_cap = True
            log.warning("stopped after max_levels=%d aggregation levels", cfg.max_levels)
            break
        level += 1
        graph = aggregate(graph, part)
        part, opt_new = step2(graph, ctx, alpha, level_rng(cfg.seed, level),
                              validate=cfg.validate, candidates=cfg.candidates)
        levels.append(part)
        log.debug("level %d: %d meta-nodes -> %d communities, objective %.6f",
                  level, graph.n, len(part), opt_new)
        if cfg.validate:
            _require(validate_partition(graph, part, ctx), f"level {level}")
        if cfg.theta >= opt_new - opt:
            break

    final = Partition(g, flatten(levels))
    runtime_ms = (time.perf_counter() - started) * 1000.0
    q = modularity(g, final)
    f_bal = global_fairness(final, ctx, BALANCE)
    f_prop = global_fairness(final, ctx, PROP_BALANCE)
    j = objective(q, f_prop if ctx.metric == PROP_BALANCE else f_bal, alpha)
    if cfg.validate:
        _require(validate_partition(g, final, ctx), "final partition")
        if abs(j - opt_new) > DELTA_TOLERANCE and level > 0:
            raise InvariantViolation(
                f"objective on the input graph {j!r} differs from the last level's {opt_new!r}")

    record = RunRecord(
        alpha=alpha, theta=cfg.theta, metric=ctx.metric, seed=cfg.seed,
        modularity=q, fairness_balance=f_bal, fairness_prop_balance=f_prop,
        objective=j, community_count=len(final), level_count=level,
        runtime_ms=runtime_ms,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        hit_max_levels=hit_cap,
    )
    return final, record
