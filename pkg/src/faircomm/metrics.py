"""Modularity, group balance and proportional-balance fairness scores.

Group counts are plain integer sequences of length ``K`` holding the number of
original nodes of each group inside a community. Community sizes are always
counts of original nodes, also on aggregated graphs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .graph import Graph, Partition

BALANCE = "balance"
PROP_BALANCE = "prop_balance"
METRICS = (BALANCE, PROP_BALANCE)


def normalize_metric(name: str) -> str:
    aliases = {"prop": PROP_BALANCE, "prop_balance": PROP_BALANCE, "balance": BALANCE}
    try:
        return aliases[name]
    except KeyError:
        raise ValueError(f"unknown fairness metric {name!r}; use 'balance' or 'prop_balance'") from None


def balance(counts: Sequence[int], K: int | None = None) -> float:
    """(K-1) times the smallest ratio of a group's members to all other members.

    A ratio with a zero denominator (the whole community is one group) never
    wins the minimum; the absent groups then score 0 anyway.
    """
    total = sum(counts)
    if not counts or total <= 0:
        raise ValueError("balance is undefined for an empty community")
    if K is None:
        K = len(counts)
    if K > len(counts):
        return 0.0
    best = math.inf
    for c in counts:
        rest = total - c
        if rest > 0:
            r = c / rest
            if r < best:
                best = r
    if best == math.inf:
        return 0.0
    return (K - 1) * best


def network_phi(group_sizes: Sequence[int], K: int | None = None) -> float:
    """Balance of the whole node set; 0 when some group is empty."""
    if K is None:
        K = len(group_sizes)
    if sum(group_sizes) <= 0:
        raise ValueError("network has no nodes")
    if len(group_sizes) < K or min(group_sizes) == 0:
        return 0.0
    return balance(group_sizes, K)


@dataclass(frozen=True)
class FairnessContext:
    """Network-level reference quantities, fixed for a whole run."""

    group_sizes: tuple[int, ...]
    metric: str = PROP_BALANCE
    K: int = field(init=False)
    n: int = field(init=False)
    phi: float = field(init=False)
    _expected: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(x) for x in self.group_sizes)
        if len(sizes) < 2:
            raise ValueError(f"at least two groups are required, got K={len(sizes)}")
        if any(x < 0 for x in sizes) or sum(sizes) <= 0:
            raise ValueError(f"invalid group sizes {sizes}")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "metric", normalize_metric(self.metric))
        object.__setattr__(self, "K", len(sizes))
        object.__setattr__(self, "n", sum(sizes))
        object.__setattr__(self, "phi", network_phi(sizes))
        object.__setattr__(self, "_expected", {})

    @classmethod
    def from_graph(cls, g: Graph, metric: str = PROP_BALANCE) -> "FairnessContext":
        return cls(g.group_sizes, metric)

    def with_metric(self, metric: str) -> "FairnessContext":
        return FairnessContext(self.group_sizes, metric)

    def score(self, counts: Sequence[int], size: int | None = None) -> float:
        """Per-community fairness under the selected metric."""
        if self.metric == BALANCE:
            return balance(counts, self.K)
        return prop_balance(counts, size, self)


def n_extra(community_size: int, ctx: FairnessContext) -> int:
    """Members left over after colouring a community in network proportions."""
    s = int(community_size)
    return s - sum((s * h) // ctx.n for h in ctx.group_sizes)


def expected_prop_balance(community_size: int, ctx: FairnessContext) -> float:
    cached = ctx._expected.get(community_size)
    if cached is not None:
        return cached
    K = ctx.K
    s = community_size
    if s < K:
        value = 0.0
    else:
        phi = ctx.phi
        ne = n_extra(s, ctx)
        value = (phi * K * s + (phi + K - 1 - phi * K) * ne) / (K * s + (phi - 1) * ne)
    ctx._expected[community_size] = value
    return value


def prop_balance(counts: Sequence[int], community_size: int | None, ctx: FairnessContext) -> float:
    if community_size is None:
        community_size = sum(counts)
    shortfall = expected_prop_balance(community_size, ctx) - balance(counts, ctx.K)
    return min(1.0, 1.0 - shortfall)


def modularity(g: Graph, p: Partition) -> float:
    """Newman modularity, computed from scratch over ordered node pairs."""
    two_m = g.total_weight
    if two_m <= 0:
        raise ValueError("modularity is undefined for a graph without edge weight")
    comm = p.assignment
    internal: dict[int, float] = {}
    tot: dict[int, float] = {}
    for u in range(g.n):
        c = comm[u]
        acc = 2.0 * g.loops[u]
        for v, w in g.adj[u].items():
            if comm[v] == c:
                acc += w
        internal[c] = internal.get(c, 0.0) + acc
        tot[c] = tot.get(c, 0.0) + g.degrees[u]
    return sum(internal[c] / two_m - (tot[c] / two_m) ** 2 for c in internal)


def global_fairness(p: Partition, ctx: FairnessContext, metric: str | None = None) -> float:
    """Size-weighted mean of per-community fairness over original nodes."""
    if metric is not None and normalize_metric(metric) != ctx.metric:
        ctx = ctx.with_metric(metric)
    total = 0.0
    for c, counts in p.community_group_counts.items():
        size = p.community_node_weight[c]
        total += size * ctx.score(counts, size)
    return total / ctx.n


def objective(q: float, f: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * q + (1.0 - alpha) * f


def modularity_gain(two_m, k_v, k_v_source, k_v_target, tot_source_rest, tot_target):
    """Change in modularity when a node leaves one community for another.

    ``k_v_source`` is the node's edge weight to the *other* members of its
    community, ``tot_source_rest`` that community's degree sum without the node.
    """
    return 2.0 * (two_m * (k_v_target - k_v_source)
                  - k_v * (tot_target - tot_source_rest)) / (two_m * two_m)


def community_contribution(ctx: FairnessContext, counts, size) -> float:
    return size * ctx.score(counts, size) if size > 0 else 0.0


def delta_objective_move(g: Graph, p: Partition, ctx: FairnessContext, node: int,
                         source: int, target: int | None, alpha: float) -> float:
    """Objective change for moving ``node`` from ``source`` to ``target``.

    ``target=None`` means a new, empty community. Only the two affected
    communities are re-scored.
    """
    if p.assignment[node] != source:
        raise ValueError(f"node {node} is not in community {source}")
    objective(0.0, 0.0, alpha)
    if target == source or (target is None and p.community_members_count[source] == 1):
        return 0.0
    if target is not None and target not in p.community_members_count:
        raise ValueError(f"community {target} does not exist")
    k_s = k_t = 0.0
    comm = p.assignment
    for u, w in g.adj[node].items():
        c = comm[u]
        if c == source:
            k_s += w
        elif c == target:
            k_t += w
    k_v = g.degrees[node]
    tot_t = p.community_degree[target] if target is not None else 0.0
    dq = modularity_gain(g.total_weight, k_v, k_s, k_t, p.community_degree[source] - k_v, tot_t)
    if alpha == 1.0:
        return dq

    gv = g.group_counts[node]
    wv = g.node_weights[node]
    src = p.community_group_counts[source]
    src_size = p.community_node_weight[source]
    if target is None:
        dst, dst_size = [0] * ctx.K, 0
    else:
        dst, dst_size = p.community_group_counts[target], p.community_node_weight[target]
    before = (community_contribution(ctx, src, src_size)
              + community_contribution(ctx, dst, dst_size))
    after = (community_contribution(ctx, [a - b for a, b in zip(src, gv)], src_size - wv)
             + community_contribution(ctx, [a + b for a, b in zip(dst, gv)], dst_size + wv))
    df = (after - before) / ctx.n
    return alpha * dq + (1.0 - alpha) * df
