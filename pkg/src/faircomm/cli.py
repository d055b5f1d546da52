"""Command-line entry point: detect, metrics, generate, sweep."""
from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from .dataio import (
    DataError, load_network, read_partition, write_graph, write_groups, write_partition,
    write_records,
)
from .generators import GeneratorConfig, clique_edges, generate
from .graph import GraphError, Partition
from .metrics import (
    FairnessContext, balance, expected_prop_balance, global_fairness, modularity,
    prop_balance,
)
from .optimizer import InvariantViolation, OptimizerConfig, mouflon
from .sweep import load_spec, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


def _add_network_args(p):
    p.add_argument("--graph", required=True, help="edge list file")
    p.add_argument("--groups", required=True, help="node group file")
    p.add_argument("--group-mode", choices=["categorical", "median"], default="categorical")


def _metric(name):
    return {"prop": "prop_balance"}.get(name, name)


def cmd_detect(args) -> int:
    graph, labels = load_network(args.graph, args.groups, args.group_mode)
    cfg = OptimizerConfig(alpha=args.alpha, theta=args.theta, metric=_metric(args.metric),
                          seed=args.seed, validate=args.validate, candidates=args.candidates)
    part, record = mouflon(graph, cfg)
    record.source = Path(args.graph).name
    if args.no_timing:
        record.runtime_ms = None
        record.timestamp = ""
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_partition(out, part.assignment, labels)
    records = Path(args.records) if args.records else out.with_suffix(".csv")
    write_records(records, [record])
    print(f"modularity              {record.modularity:.6f}")
    print(f"fairness (balance)      {record.fairness_balance:.6f}")
    print(f"fairness (prop_balance) {record.fairness_prop_balance:.6f}")
    print(f"objective               {record.objective:.6f}")
    print(f"communities             {record.community_count}")
    print(f"levels                  {record.level_count}")
    if record.runtime_ms is not None:
        print(f"runtime_ms              {record.runtime_ms:.1f}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    graph, labels = load_network(args.graph, args.groups, args.group_mode)
    assigned = read_partition(args.partition)
    absent = [label for label in labels if label not in assigned]
    if absent:
        raise DataError(f"partition lacks {len(absent)} nodes, e.g. {absent[0]!r}")
    p = Partition(graph, [assigned[label] for label in labels])
    ctx = FairnessContext.from_graph(graph)
    print(f"nodes {graph.n}  edges {graph.edge_count()}  K {ctx.K}  phi {ctx.phi:.6f}")
    print(f"group sizes {list(ctx.group_sizes)}")
    if graph.total_weight > 0:
        print(f"modularity {modularity(graph, p):.6f}")
    print(f"fairness (balance)      {global_fairness(p, ctx, 'balance'):.6f}")
    print(f"fairness (prop_balance) {global_fairness(p, ctx, 'prop_balance'):.6f}")
    print(f"communities {len(p)}")
    print(f"{'community':>9} {'size':>6} {'balance':>9} {'exp_prop':>9} {'prop_bal':>9}  counts")
    for c in p.community_ids():
        counts = p.community_group_counts[c]
        size = p.community_node_weight[c]
        print(f"{c:>9} {size:>6} {balance(counts, ctx.K):>9.4f} "
              f"{expected_prop_balance(size, ctx):>9.4f} {prop_balance(counts, size, ctx):>9.4f}"
              f"  {list(counts)}")
    return EXIT_OK


def cmd_generate(args) -> int:
    p_groups = tuple(float(x) for x in args.p_groups.split(","))
    cfg = GeneratorConfig(kind=args.kind, n=args.n, p=args.p, L=args.L, l=args.l,
                          p_rewire=args.p_rewire, p_groups=p_groups,
                          coloring_mode=args.coloring, structure_seed=args.structure_seed,
                          coloring_seed=args.coloring_seed)
    graph = generate(cfg)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    edges_path = prefix.with_name(prefix.name + ".edges")
    groups_path = prefix.with_name(prefix.name + ".groups")
    write_graph(edges_path, graph)
    write_groups(groups_path, graph.groups)
    freq = Counter(graph.groups)
    print(f"wrote {edges_path} and {groups_path}")
    print(f"n {graph.n}  m {graph.edge_count()}  K {cfg.K}  p_sensitive {cfg.p_sensitive:g}")
    print("group fractions " + " ".join(
        f"{j}:{freq.get(j, 0) / graph.n:.4f}" for j in range(1, cfg.K + 1)))
    if cfg.kind == "rewired_cliques":
        _, stats = clique_edges(cfg)
        print(f"rewired {stats.rewired}  skipped {stats.skipped}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_spec(args.spec)
    if args.workers is not None:
        spec.workers = args.workers
    if args.validate:
        spec.optimizer.validate = True
    if args.no_timing:
        spec.record_timing = False
    records = run_sweep(spec)
    print(f"{len(records)} runs -> {spec.records}, {spec.summary}"
          + (f", {spec.chart}" if spec.chart else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faircomm",
                                     description="Fairness-aware modularity community detection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="run the optimiser once")
    _add_network_args(d)
    d.add_argument("--alpha", type=float, default=0.5)
    d.add_argument("--theta", type=float, default=1e-6)
    d.add_argument("--metric", choices=["balance", "prop", "prop_balance"], default="prop")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--candidates", choices=["all", "neighbors"], default="all",
                   help="communities scored per move in the fairness phase "
                        "(neighbors is faster on large graphs)")
    d.add_argument("--out", required=True, help="partition output file")
    d.add_argument("--records", help="record CSV (default: partition path with .csv)")
    d.add_argument("--validate", action="store_true",
                   help="check every incremental gain against a full recomputation")
    d.add_argument("--no-timing", action="store_true",
                   help="leave runtime and timestamp empty for reproducible output")
    d.set_defaults(func=cmd_detect)

    m = sub.add_parser("metrics", help="score an existing partition")
    _add_network_args(m)
    m.add_argument("--partition", required=True)
    m.set_defaults(func=cmd_metrics)

    g = sub.add_parser("generate", help="write a synthetic network")
    g.add_argument("--kind", choices=["er", "cliques"], default="cliques")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--p", type=float, default=0.001)
    g.add_argument("--L", type=int, default=10)
    g.add_argument("--l", type=int, default=10)
    g.add_argument("--p-rewire", type=float, default=0.1)
    g.add_argument("--p-groups", default="0.5,0.5")
    g.add_argument("--coloring", choices=["individual", "clique"], default="individual")
    g.add_argument("--structure-seed", type=int, default=0)
    g.add_argument("--coloring-seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output prefix (.edges and .groups are added)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sweep", help="run a parameter sweep from a YAML spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--workers", type=int)
    s.add_argument("--validate", action="store_true")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, GraphError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
