"""Parameter sweeps: repeated runs over one axis, CSV records, summary and chart."""
from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .dataio import RunRecord, load_network, write_partition, write_records
from .generators import GeneratorConfig, generate
from .optimizer import OptimizerConfig, mouflon

log = logging.getLogger(__name__)

AXES = ("alpha", "p_sensitive", "n", "p_density")
SUMMARY_METRICS = ("modularity", "fairness_balance", "fairness_prop_balance",
                   "objective", "community_count", "runtime_ms")


@dataclass
class SweepSpec:
    axis: str
    values: list[float]
    repeats: int = 10
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    generator: GeneratorConfig | None = None
    dataset: dict | None = None
    records: Path = Path("records.csv")
    summary: Path = Path("summary.csv")
    chart: Path | None = Path("summary.svg")
    partitions: Path | None = None
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep has no axis values")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if (self.generator is None) == (self.dataset is None):
            raise ValueError("give exactly one of 'generator' or 'dataset'")
        if self.dataset is not None and self.axis != "alpha":
            raise ValueError("dataset sweeps only support the alpha axis")
        for v in self.values:
            if self.axis in ("alpha", "p_density") and not 0.0 <= v <= 1.0:
                raise ValueError(f"{self.axis} value {v} outside [0, 1]")
            if self.axis == "p_sensitive" and not 0.0 <= v <= 0.5:
                raise ValueError(f"p_sensitive value {v} outside [0, 0.5]")
            if self.axis == "n" and (v < 1 or v != int(v)):
                raise ValueError(f"node count {v} is not a positive integer")
        if self.axis in ("n", "p_density") and self.generator.kind != "er":
            raise ValueError(f"the {self.axis} axis needs an 'er' generator")
        if self.axis == "p_sensitive" and self.generator.K != 2:
            raise ValueError("the p_sensitive axis needs exactly two groups")

    @property
    def source(self) -> str:
        if self.dataset is not None:
            return str(self.dataset.get("name") or Path(self.dataset["graph"]).stem)
        return self.generator.kind


def load_spec(path) -> SweepSpec:
    """Read a YAML sweep file; relative paths resolve against its directory."""
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    base = path.parent

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        return p if p.is_absolute() else base / p

    out = raw.get("output", {})
    dataset = raw.get("dataset")
    if dataset is not None:
        dataset = dict(dataset)
        dataset["graph"] = resolve(dataset["graph"])
        dataset["groups"] = resolve(dataset["groups"])
    gen = raw.get("generator")
    return SweepSpec(
        axis=raw["axis"],
        values=[float(v) for v in raw["values"]],
        repeats=int(raw.get("repeats", 10)),
        optimizer=OptimizerConfig(**raw.get("optimizer", {})),
        generator=GeneratorConfig(**gen) if gen is not None else None,
        dataset=dataset,
        records=resolve(out.get("records", "records.csv")),
        summary=resolve(out.get("summary", "summary.csv")),
        chart=resolve(out.get("chart", "summary.svg")),
        partitions=resolve(out.get("partitions")),
        workers=int(raw.get("workers", 1)),
        record_timing=bool(raw.get("record_timing", True)),
    )


def run_seed(base: int, axis_index: int, repeat: int) -> int:
    """Position-derived seed, independent of execution order."""
    ss = np.random.SeedSequence([int(base), axis_index, repeat])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _plan(spec: SweepSpec):
    """Yield ``(axis_index, value, repeat, graph_key, gen_cfg, opt_cfg)`` per run."""
    base = spec.optimizer
    for i, value in enumerate(spec.values):
        gen = spec.generator
        if spec.axis == "n":
            gen = replace(gen, n=int(value))
        elif spec.axis == "p_density":
            gen = replace(gen, p=value)
        for r in range(spec.repeats):
            seed = run_seed(base.seed, i, r)
            opt = replace(base, seed=seed)
            g_cfg = gen
            if spec.axis == "alpha":
                opt = replace(opt, alpha=value)
            elif spec.axis == "p_sensitive":
                coloring = run_seed(spec.generator.coloring_seed, i, r)
                g_cfg = replace(gen, p_groups=(1.0 - value, value), coloring_seed=coloring)
            yield i, value, r, g_cfg, opt


def _execute(job):
    i, value, r, graph_or_cfg, opt, labels = job
    graph = graph_or_cfg if not isinstance(graph_or_cfg, GeneratorConfig) else generate(graph_or_cfg)
    part, record = mouflon(graph, opt)
    return i, value, r, part.assignment, record, labels


def run_sweep(spec: SweepSpec) -> list[RunRecord]:
    """Run every (axis value, repeat) pair and write records, summary and chart.

    Records are appended one at a time in plan order, so an aborted sweep
    leaves every finished run on disk.
    """
    fixed_graph = None
    labels = None
    if spec.dataset is not None:
        fixed_graph, labels = load_network(spec.dataset["graph"], spec.dataset["groups"],
                                           spec.dataset.get("group_mode", "categorical"))
    elif spec.axis == "alpha":
        fixed_graph = generate(spec.generator)

    graph_cache = {}
    jobs = []
    for i, value, r, g_cfg, opt in _plan(spec):
        if fixed_graph is not None:
            graph = fixed_graph
        elif spec.axis in ("n", "p_density"):
            graph = graph_cache.get(i)
            if graph is None:
                graph = graph_cache[i] = generate(g_cfg)
        else:
            graph = g_cfg
        jobs.append((i, value, r, graph, opt, labels))

    for p in (spec.records, spec.summary, spec.chart):
        if p is not None:
            Path(p).parent.mkdir(parents=True, exist_ok=True)
    write_records(spec.records, [])
    if spec.partitions is not None:
        Path(spec.partitions).mkdir(parents=True, exist_ok=True)

    records = []
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = pool.map(_execute, jobs)
            records = _collect(spec, results)
    else:
        records = _collect(spec, map(_execute, jobs))

    rows = summarize(records, spec.axis, spec.values)
    write_summary(spec.summary, rows)
    if spec.chart is not None:
        write_chart(spec.chart, spec.summary)
    return records


def _collect(spec, results):
    records = []
    for i, value, r, assignment, record, labels in results:
        record.source = spec.source
        record.axis = spec.axis
        record.axis_value = value
        record.repeat = r
        if not spec.record_timing:
            record.runtime_ms = None
            record.timestamp = ""
        write_records(spec.records, [record], append=True)
        if spec.partitions is not None:
            write_partition(Path(spec.partitions) / f"{spec.axis}-{i:03d}-{r:03d}.txt",
                            assignment, labels)
        records.append(record)
        log.info("%s=%g repeat %d: Q=%.4f F=%.4f communities=%d", spec.axis, value, r,
                 record.modularity, record.fairness_prop_balance, record.community_count)
    return records


def summarize(records, axis: str, values=None) -> list[dict]:
    """Mean and sample standard deviation per axis value."""
    groups: dict[float, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.axis_value, []).append(rec)
    order = values if values is not None else sorted(groups)
    rows = []
    for v in order:
        recs = groups.get(v, [])
        if not recs:
            continue
        row = {"axis": axis, "value": v, "runs": len(recs)}
        for name in SUMMARY_METRICS:
            xs = [getattr(r, name) for r in recs]
            if any(x is None for x in xs):
                row[f"{name}_mean"] = None
                row[f"{name}_std"] = None
                continue
            xs = [float(x) for x in xs]
            row[f"{name}_mean"] = statistics.fmean(xs)
            row[f"{name}_std"] = statistics.stdev(xs) if len(xs) > 1 else math.nan
        rows.append(row)
    return rows


SUMMARY_FIELDS = ["axis", "value", "runs"] + [
    f"{name}_{stat}" for name in SUMMARY_METRICS for stat in ("mean", "std")]


def write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_FIELDS)
        for row in rows:
            writer.writerow(["" if row.get(k) is None else
                             (repr(row[k]) if isinstance(row[k], float) else row[k])
                             for k in SUMMARY_FIELDS])


def read_summary(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {"axis": raw["axis"], "value": float(raw["value"]), "runs": int(raw["runs"])}
            for k in SUMMARY_FIELDS[3:]:
                row[k] = float(raw[k]) if raw.get(k, "") != "" else None
            rows.append(row)
    return rows


_SERIES = (("modularity", "#1f77b4", "modularity"),
           ("fairness_prop_balance", "#d62728", "prop_balance fairness"),
           ("fairness_balance", "#2ca02c", "balance fairness"))


def chart_svg(rows) -> str:
    """Two-panel SVG: mean scores with std error bars, and community counts."""
    W, H, pad = 360, 260, 45
    xs = [r["value"] for r in rows]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    axis = rows[0]["axis"] if rows else ""

    def sx(x, left):
        return left + pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def panel(left, series, y0, y1, title):
        if y1 == y0:
            y1 = y0 + 1.0

        def sy(y):
            return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

        out = [f'<text x="{left + W / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
               f'<line x1="{left + pad}" y1="{H - pad}" x2="{left + W - pad}" y2="{H - pad}" stroke="black"/>',
               f'<line x1="{left + pad}" y1="{pad}" x2="{left + pad}" y2="{H - pad}" stroke="black"/>',
               f'<text x="{left + W / 2:.1f}" y="{H - 8}" text-anchor="middle" font-size="12">{axis}</text>']
        for k in range(5):
            yv = y0 + (y1 - y0) * k / 4
            out.append(f'<text x="{left + pad - 4}" y="{sy(yv) + 4:.1f}" text-anchor="end" '
                       f'font-size="10">{yv:.2f}</text>')
        for xv in xs:
            out.append(f'<text x="{sx(xv, left):.1f}" y="{H - pad + 14}" text-anchor="middle" '
                       f'font-size="10">{xv:g}</text>')
        for n_legend, (key, color, label) in enumerate(series):
            pts = [(r["value"], r[f"{key}_mean"], r[f"{key}_std"]) for r in rows
                   if r.get(f"{key}_mean") is not None]
            if not pts:
                continue
            path = " ".join(f"{sx(x, left):.2f},{sy(m):.2f}" for x, m, _ in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            for x, m, s in pts:
                if s is not None and not math.isnan(s) and s > 0:
                    out.append(f'<line x1="{sx(x, left):.2f}" y1="{sy(m - s):.2f}" x2="{sx(x, left):.2f}" '
                               f'y2="{sy(m + s):.2f}" stroke="{color}"/>')
                out.append(f'<circle cx="{sx(x, left):.2f}" cy="{sy(m):.2f}" r="2.5" fill="{color}"/>')
            ly = pad + 14 * n_legend
            out.append(f'<line x1="{left + W - pad - 110}" y1="{ly}" x2="{left + W - pad - 95}" '
                       f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + W - pad - 90}" y="{ly + 4}" font-size="10">{label}</text>')
        return out

    scores = [v for r in rows for key, _, _ in _SERIES
              for v in ((r.get(f"{key}_mean") or 0.0),)]
    lo = min([0.0] + scores)
    hi = max([1.0] + scores)
    counts = [r["community_count_mean"] for r in rows if r.get("community_count_mean") is not None]
    body = panel(0, _SERIES, lo, hi, "scores (mean ± std)")
    body += panel(W, (("community_count", "#444444", "communities"),),
                  0.0, max(counts + [1.0]) * 1.1, "community count")
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * W}" height="{H}" '
        f'viewBox="0 0 {2 * W} {H}" font-family="sans-serif">',
        f'<rect width="{2 * W}" height="{H}" fill="white"/>',
        *body,
        "</svg>",
        "",
    ])


def write_chart(path, summary_path):
    """Render the chart from a summary CSV; identical input gives identical bytes."""
    svg = chart_svg(read_summary(summary_path))
    with open(path, "w") as fh:
        fh.write(svg)
