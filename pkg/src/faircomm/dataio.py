"""Edge-list, group-file, partition and run-record input/output.

Text formats:

* edge list: ``u v [w]`` per line, whitespace or comma separated, ``#`` comments
* group file: ``node value`` per line
* partition file: ``node community`` per line
* records: CSV with a fixed header, one row per run
"""
from __future__ import annotations

import csv
import math
import re
import statistics
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

MISSING_TOKENS = frozenset({"", "null", "none", "na", "nan", "n/a", "?"})

_SPLIT = re.compile(r"[,\s]+")


class DataError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass
class EdgeList:
    """Edges over dense ids plus the original label of every dense id."""

    edges: list[tuple[int, int, float]]
    labels: list[str]

    @property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}


def _fields(line: str) -> list[str]:
    return [t for t in _SPLIT.split(line.strip()) if t]


def load_edge_list(path) -> EdgeList:
    """Parse an edge list, relabelling node ids densely by first appearance."""
    index: dict[str, int] = {}
    labels: list[str] = []
    edges = []

    def node(token):
        i = index.get(token)
        if i is None:
            i = index[token] = len(labels)
            labels.append(token)
        return i

    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = _fields(stripped)
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected 'u v [w]', got {stripped!r}")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad weight {parts[2]!r}") from None
                if not math.isfinite(w) or w < 0:
                    raise DataError(f"{path}:{lineno}: weight must be finite and >= 0")
            edges.append((node(parts[0]), node(parts[1]), w))
    if not edges:
        raise DataError(f"{path}: no edges found")
    return EdgeList(edges, labels)


@dataclass
class GroupLabels:
    """Group index (1-based) per original node id, plus nodes lacking a value."""

    groups: dict[str, int]
    missing: set[str]
    categories: list[str]

    @property
    def K(self) -> int:
        return len(self.categories)


def load_groups(path, mode: str = "categorical") -> GroupLabels:
    """Read ``node value`` lines.

    ``categorical`` numbers distinct values by first appearance.
    ``median_split`` puts values at or below the median in group 1 and the rest
    in group 2. Nodes whose value is absent or a missing-value token are
    reported in ``missing``.
    """
    if mode in ("median", "median_split"):
        mode = "median_split"
    elif mode != "categorical":
        raise ValueError(f"unknown group mode {mode!r}")
    raw: dict[str, str] = {}
    missing: set[str] = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = _fields(stripped)
            if len(parts) > 2:
                raise DataError(f"{path}:{lineno}: expected 'node value', got {stripped!r}")
            node = parts[0]
            value = parts[1] if len(parts) == 2 else ""
            if value.lower() in MISSING_TOKENS:
                missing.add(node)
                raw.pop(node, None)
            else:
                raw[node] = value
                missing.discard(node)

    if mode == "categorical":
        codes: dict[str, int] = {}
        groups = {node: codes.setdefault(value, len(codes) + 1) for node, value in raw.items()}
        return GroupLabels(groups, missing, list(codes))

    numeric = {}
    for node, value in raw.items():
        try:
            numeric[node] = float(value)
        except ValueError:
            raise DataError(f"{path}: non-numeric value {value!r} for node {node}") from None
    if not numeric:
        raise DataError(f"{path}: no values to split")
    median = statistics.median(numeric.values())
    groups = {node: 1 if x <= median else 2 for node, x in numeric.items()}
    categories = [f"<={median:g}"] + ([f">{median:g}"] if 2 in groups.values() else [])
    return GroupLabels(groups, missing, categories)


def load_network(edge_path, group_path, mode: str = "categorical"):
    """Load a labelled network as ``(Graph, labels)``.

    Nodes without a usable group value are dropped together with their edges
    (induced subgraph). Nodes that only appear in the group file become
    isolated nodes.
    """
    from .graph import build_graph

    el = load_edge_list(edge_path)
    gl = load_groups(group_path, mode)
    keep = [label for label in el.labels if label in gl.groups]
    extra = sorted((label for label in gl.groups if label not in set(el.labels)), key=_sort_key)
    labels = keep + extra
    index = {label: i for i, label in enumerate(labels)}
    old = el.labels
    edges = []
    for u, v, w in el.edges:
        iu, iv = index.get(old[u]), index.get(old[v])
        if iu is not None and iv is not None:
            edges.append((iu, iv, w))
    groups = [gl.groups[label] for label in labels]
    return build_graph(edges, groups, K=max(groups) if groups else 0), labels


def _sort_key(label: str):
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


def write_graph(path, graph, labels: Sequence[str] | None = None):
    with open(path, "w") as fh:
        for u, v, w in graph.edges():
            a = labels[u] if labels else u
            b = labels[v] if labels else v
            if w == 1.0:
                fh.write(f"{a} {b}\n")
            else:
                fh.write(f"{a} {b} {w!r}\n")


def write_groups(path, groups: Sequence[int], labels: Sequence[str] | None = None):
    with open(path, "w") as fh:
        for i, g in enumerate(groups):
            fh.write(f"{labels[i] if labels else i} {g}\n")


def write_partition(path, assignment: Sequence[int], labels: Sequence[str] | None = None):
    """Write ``node community`` lines sorted by node id, communities dense from 0.

    Community ids follow the order in which communities first appear in the
    sorted node listing, so equal partitions always produce identical files.
    """
    names = [str(x) for x in labels] if labels is not None else [str(i) for i in range(len(assignment))]
    if len(names) != len(assignment):
        raise DataError("labels and assignment differ in length")
    order = sorted(range(len(names)), key=lambda i: _sort_key(names[i]))
    dense: dict[int, int] = {}
    lines = []
    for i in order:
        c = dense.setdefault(assignment[i], len(dense))
        lines.append(f"{names[i]} {c}\n")
    with open(path, "w") as fh:
        fh.writelines(lines)


def read_partition(path) -> dict[str, int]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = _fields(stripped)
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'node community'")
            try:
                out[parts[0]] = int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: community id must be an integer") from None
    return out


def same_partition(a: Sequence[int], b: Sequence[int]) -> bool:
    """Equality up to renaming of community ids."""
    if len(a) != len(b):
        return False
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    for x, y in zip(a, b):
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


@dataclass
class RunRecord:
    """Outcome of one optimisation run plus the configuration that produced it."""

    alpha: float
    theta: float
    metric: str
    seed: int
    modularity: float
    fairness_balance: float
    fairness_prop_balance: float
    objective: float
    community_count: int
    level_count: int
    runtime_ms: float | None = None
    timestamp: str = ""
    hit_max_levels: bool = False
    source: str = ""
    axis: str = ""
    axis_value: float | None = None
    repeat: int | None = None


RECORD_FIELDS = [f.name for f in fields(RunRecord)]
_INT_FIELDS = {"seed", "community_count", "level_count", "repeat"}
_FLOAT_FIELDS = {"alpha", "theta", "modularity", "fairness_balance", "fairness_prop_balance",
                 "objective", "runtime_ms", "axis_value"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(path, records: Iterable[RunRecord], append: bool = False):
    """Write records as CSV; with ``append`` the header is only written to a new file."""
    path = Path(path)
    new_file = not append or not path.exists() or path.stat().st_size == 0
    with open(path, "a" if append else "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new_file:
            writer.writerow(RECORD_FIELDS)
        for rec in records:
            row = asdict(rec)
            writer.writerow([_cell(row[name]) for name in RECORD_FIELDS])


def read_records(path) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name in RECORD_FIELDS:
                value = row.get(name, "")
                if name in _INT_FIELDS:
                    kw[name] = int(value) if value != "" else None
                elif name in _FLOAT_FIELDS:
                    kw[name] = float(value) if value != "" else None
                elif name == "hit_max_levels":
                    kw[name] = value == "True"
                else:
                    kw[name] = value
            out.append(RunRecord(**kw))
    return out
