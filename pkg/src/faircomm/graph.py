"""Weighted undirected graphs with group labels, partitions and aggregation.

A self-loop of stored weight ``s`` contributes ``2 * s`` to the weighted
degree of its node. Aggregating a community therefore stores half of the
community's internal (ordered-pair) weight on the meta-node's self-loop, and
modularity values carry over unchanged between aggregation levels.
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Raised for malformed graph or partition input."""


class Graph:
    """Immutable weighted undirected graph.

    Nodes are ``0..n-1``. ``adj[i]`` maps neighbour -> weight and never
    contains ``i`` itself; self-loops live in ``loops``. Every node carries a
    node weight (number of original nodes it stands for) and a per-group count
    vector of length ``K``.
    """

    __slots__ = (
        "n", "K", "adj", "loops", "degrees", "total_weight",
        "node_weights", "group_counts", "groups", "group_sizes",
    )

    def __init__(self, adj, loops, node_weights, group_counts, groups=None):
        self.adj: list[dict[int, float]] = adj
        self.loops: list[float] = loops
        self.n = len(adj)
        self.node_weights: list[int] = node_weights
        self.group_counts: list[tuple[int, ...]] = group_counts
        self.groups: list[int] | None = groups
        self.K = len(group_counts[0]) if group_counts else 0
        self.degrees = [sum(nbrs.values()) + 2.0 * loops[i] for i, nbrs in enumerate(adj)]
        self.total_weight = float(sum(self.degrees))
        sizes = [0] * self.K
        for counts in group_counts:
            for j, c in enumerate(counts):
                sizes[j] += c
        self.group_sizes = tuple(sizes)

    @property
    def m(self) -> float:
        """Total edge weight (half the degree sum)."""
        return self.total_weight / 2.0

    @property
    def original_node_count(self) -> int:
        return sum(self.node_weights)

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return self.loops[i]
        return self.adj[i].get(j, 0.0)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield each undirected edge once as ``(u, v, w)`` with ``u <= v``."""
        for u in range(self.n):
            if self.loops[u]:
                yield u, u, self.loops[u]
            for v, w in sorted(self.adj[u].items()):
                if u < v:
                    yield u, v, w

    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m:g}, K={self.K})"


def build_graph(edges: Iterable[Sequence], groups: Sequence[int], K: int | None = None) -> Graph:
    """Build a graph from ``(u, v[, w])`` triples and 1-based group labels.

    Node ids must be dense in ``[0, len(groups))``. Duplicate edges are merged
    by summing their weights; missing weights default to 1.
    """
    groups = [int(g) for g in groups]
    n = len(groups)
    if K is None:
        K = max(groups) if groups else 0
    for i, g in enumerate(groups):
        if not 1 <= g <= K:
            raise GraphError(f"group of node {i} is {g}, expected a value in [1, {K}]")

    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    loops = [0.0] * n
    for edge in edges:
        if len(edge) == 2:
            u, v = edge
            w = 1.0
        else:
            u, v, w = edge
            w = float(w)
        u, v = int(u), int(v)
        if w < 0:
            raise GraphError(f"negative weight {w} on edge ({u}, {v})")
        for node in (u, v):
            if not 0 <= node < n:
                raise GraphError(f"node {node} appears in an edge but has no group")
        if u == v:
            loops[u] += w
        else:
            adj[u][v] = adj[u].get(v, 0.0) + w
            adj[v][u] = adj[v].get(u, 0.0) + w

    counts = []
    for g in groups:
        c = [0] * K
        c[g - 1] = 1
        counts.append(tuple(c))
    return Graph(adj, loops, [1] * n, counts, groups)


class Partition:
    """Mutable assignment of graph nodes to communities.

    Keeps per-community aggregates up to date under :meth:`move`:
    weighted degree sum, original node count, member count and group counts.
    Community ids are arbitrary non-negative integers; emptied ids are reused
    smallest-first when a node opens a new community.
    """

    def __init__(self, graph: Graph, assignment: Sequence[int]):
        if len(assignment) != graph.n:
            raise GraphError(
                f"assignment covers {len(assignment)} nodes, graph has {graph.n}")
        self.graph = graph
        self.assignment = [int(c) for c in assignment]
        self.community_degree: dict[int, float] = defaultdict(float)
        self.community_node_weight: dict[int, int] = defaultdict(int)
        self.community_members_count: dict[int, int] = defaultdict(int)
        self.community_group_counts: dict[int, list[int]] = {}
        K = graph.K
        for v, c in enumerate(self.assignment):
            if c < 0:
                raise GraphError(f"negative community id {c} for node {v}")
            self.community_degree[c] += graph.degrees[v]
            self.community_node_weight[c] += graph.node_weights[v]
            self.community_members_count[c] += 1
            counts = self.community_group_counts.setdefault(c, [0] * K)
            for j, x in enumerate(graph.group_counts[v]):
                counts[j] += x
        self.community_degree = dict(self.community_degree)
        self.community_node_weight = dict(self.community_node_weight)
        self.community_members_count = dict(self.community_members_count)
        top = max(self.assignment, default=-1)
        self._free = [c for c in range(top) if c not in self.community_members_count]
        heapq.heapify(self._free)
        self._next_id = top + 1

    @classmethod
    def singletons(cls, graph: Graph) -> "Partition":
        return cls(graph, range(graph.n))

    @classmethod
    def all_in_one(cls, graph: Graph) -> "Partition":
        return cls(graph, [0] * graph.n)

    def __len__(self):
        return len(self.community_members_count)

    @property
    def communities(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = defaultdict(set)
        for v, c in enumerate(self.assignment):
            out[c].add(v)
        return dict(out)

    def community_ids(self) -> list[int]:
        return sorted(self.community_members_count)

    def peek_new_id(self) -> int:
        """Id the next newly opened community would receive."""
        return self._free[0] if self._free else self._next_id

    def move(self, node: int, target: int | None) -> int:
        """Move ``node`` into ``target`` (``None`` opens a new community).

        Returns the id of the community the node ends up in.
        """
        g = self.graph
        source = self.assignment[node]
        if target is None:
            target = heapq.heappop(self._free) if self._free else self._next_id
            if target == self._next_id:
                self._next_id += 1
        if target == source:
            return target
        k = g.degrees[node]
        w = g.node_weights[node]
        gc = g.group_counts[node]
        self.community_degree[source] -= k
        self.community_node_weight[source] -= w
        self.community_members_count[source] -= 1
        src_counts = self.community_group_counts[source]
        for j, x in enumerate(gc):
            src_counts[j] -= x
        if self.community_members_count[source] == 0:
            del self.community_degree[source]
            del self.community_node_weight[source]
            del self.community_members_count[source]
            del self.community_group_counts[source]
            heapq.heappush(self._free, source)

        if target not in self.community_members_count:
            self.community_degree[target] = 0.0
            self.community_node_weight[target] = 0
            self.community_members_count[target] = 0
            self.community_group_counts[target] = [0] * g.K
            if target in self._free:
                self._free.remove(target)
                heapq.heapify(self._free)
            self._next_id = max(self._next_id, target + 1)
        self.community_degree[target] += k
        self.community_node_weight[target] += w
        self.community_members_count[target] += 1
        dst_counts = self.community_group_counts[target]
        for j, x in enumerate(gc):
            dst_counts[j] += x
        self.assignment[node] = target
        return target

    def dense_assignment(self) -> list[int]:
        """Assignment relabelled to ``0..C-1`` in increasing community-id order."""
        index = {c: i for i, c in enumerate(self.community_ids())}
        return [index[c] for c in self.assignment]

    def copy(self) -> "Partition":
        return Partition(self.graph, self.assignment)


def canonical_labels(assignment: Sequence[int]) -> list[int]:
    """Relabel communities by order of first appearance (label-invariant form)."""
    seen: dict[int, int] = {}
    return [seen.setdefault(c, len(seen)) for c in assignment]


def aggregate(g: Graph, p: Partition) -> Graph:
    """Collapse every community of ``p`` into one meta-node.

    Meta-node ``i`` is the ``i``-th community in increasing id order.
    """
    if len(p.assignment) != g.n:
        raise GraphError("partition does not belong to this graph")
    labels = p.dense_assignment()
    C = len(p)
    adj: list[dict[int, float]] = [dict() for _ in range(C)]
    internal = [0.0] * C
    for u in range(g.n):
        cu = labels[u]
        row = adj[cu]
        internal[cu] += 2.0 * g.loops[u]
        for v, w in g.adj[u].items():
            cv = labels[v]
            if cu == cv:
                internal[cu] += w
            else:
                row[cv] = row.get(cv, 0.0) + w
    loops = [x / 2.0 for x in internal]
    ids = p.community_ids()
    node_weights = [p.community_node_weight[c] for c in ids]
    counts = [tuple(p.community_group_counts[c]) for c in ids]
    return Graph(adj, loops, node_weights, counts)


def flatten(levels: Sequence) -> list[int]:
    """Compose per-level assignments into one assignment of original nodes.

    ``levels[0]`` assigns original nodes; the nodes of ``levels[i + 1]`` are
    the communities of ``levels[i]`` in increasing id order (as produced by
    :func:`aggregate`). Each level may be a :class:`Partition` or a plain
    sequence of community ids. The result uses dense ids ``0..C-1`` ordered by
    each community's smallest original node.
    """
    if not levels:
        raise GraphError("no levels to flatten")
    current = list(getattr(levels[0], "assignment", levels[0]))
    for depth, level in enumerate(levels[1:], start=1):
        nxt = list(getattr(level, "assignment", level))
        ids = sorted(set(current))
        if len(ids) != len(nxt):
            raise GraphError(
                f"level {depth} has {len(nxt)} nodes but level {depth - 1} "
                f"has {len(ids)} communities")
        index = {c: i for i, c in enumerate(ids)}
        current = [nxt[index[c]] for c in current]
    return canonical_labels(current)
