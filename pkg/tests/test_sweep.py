import math
import statistics
import textwrap

import pytest

from faircomm.cli import main
from faircomm.dataio import read_records
from faircomm.sweep import (
    SweepSpec, chart_svg, load_spec, read_summary, run_seed, run_sweep, summarize,
    write_chart,
)


def _spec_file(tmp_path, body):
    path = tmp_path / "sweep.yaml"
    path.write_text(textwrap.dedent(body))
    return path


ALPHA_SPEC = """\
    axis: alpha
    values: [0, 0.5, 1]
    repeats: 2
    optimizer: {metric: prop_balance, seed: 1}
    generator: {kind: rewired_cliques, L: 10, l: 10, p_rewire: 0.1}
    record_timing: false
    output:
      records: out/records.csv
      summary: out/summary.csv
      chart: out/summary.svg
      partitions: out/parts
"""


def test_alpha_sweep_counts(tmp_path):
    spec = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    assert spec.records == tmp_path / "out" / "records.csv"
    records = run_sweep(spec)
    assert len(records) == 6
    assert len(read_records(spec.records)) == 6
    rows = read_summary(spec.summary)
    assert [r["value"] for r in rows] == [0.0, 0.5, 1.0]
    assert all(r["runs"] == 2 for r in rows)
    assert len(list((tmp_path / "out" / "parts").iterdir())) == 6
    assert spec.chart.read_text().startswith("<svg")


def test_summary_matches_independent_aggregation(tmp_path):
    spec = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    run_sweep(spec)
    recs = read_records(spec.records)
    for row in read_summary(spec.summary):
        xs = [r.modularity for r in recs if r.axis_value == row["value"]]
        assert row["modularity_mean"] == pytest.approx(sum(xs) / len(xs), abs=1e-12)
        assert row["modularity_std"] == pytest.approx(statistics.stdev(xs), abs=1e-12)
        cs = [r.community_count for r in recs if r.axis_value == row["value"]]
        assert row["community_count_mean"] == pytest.approx(sum(cs) / len(cs), abs=1e-12)
        assert row["runtime_ms_mean"] is None


def test_endpoint_row_dominance(tmp_path):
    spec = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    run_sweep(spec)
    rows = {r["value"]: r for r in read_summary(spec.summary)}
    assert rows[1.0]["modularity_mean"] >= rows[0.0]["modularity_mean"]


def test_chart_is_function_of_summary(tmp_path):
    spec = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    run_sweep(spec)
    write_chart(tmp_path / "again.svg", spec.summary)
    assert (tmp_path / "again.svg").read_bytes() == spec.chart.read_bytes()


def test_sweep_reproducible_and_worker_independent(tmp_path):
    a = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    run_sweep(a)
    first = a.records.read_bytes()
    b = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    b.workers = 2
    run_sweep(b)
    assert b.records.read_bytes() == first


def test_p_sensitive_axis_keeps_structure(tmp_path):
    spec = load_spec(_spec_file(tmp_path, """\
        axis: p_sensitive
        values: [0.1, 0.5]
        repeats: 2
        generator: {kind: rewired_cliques, L: 5, l: 6, p_rewire: 0.2, structure_seed: 3}
        output: {records: r.csv, summary: s.csv, chart: null}
    """))
    records = run_sweep(spec)
    assert [(r.axis_value, r.repeat) for r in records] == [(0.1, 0), (0.1, 1), (0.5, 0), (0.5, 1)]
    assert all(r.runtime_ms is not None for r in records)
    assert not (tmp_path / "summary.svg").exists()


def test_er_axes(tmp_path):
    spec = load_spec(_spec_file(tmp_path, """\
        axis: n
        values: [50, 100]
        repeats: 1
        generator: {kind: er, p: 0.1}
        output: {records: r.csv, summary: s.csv, chart: c.svg}
    """))
    records = run_sweep(spec)
    assert [r.axis_value for r in records] == [50.0, 100.0]
    rows = read_summary(spec.summary)
    assert math.isnan(rows[0]["modularity_std"])


def test_spec_validation():
    from faircomm import GeneratorConfig
    gen = GeneratorConfig()
    with pytest.raises(ValueError):
        SweepSpec(axis="beta", values=[0.1], generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="alpha", values=[], generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="alpha", values=[2.0], generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="p_sensitive", values=[0.7], generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="n", values=[10], generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="alpha", values=[0.5], repeats=0, generator=gen)
    with pytest.raises(ValueError):
        SweepSpec(axis="alpha", values=[0.5])


def test_run_seed_is_positional():
    assert run_seed(0, 1, 2) == run_seed(0, 1, 2)
    assert len({run_seed(0, i, r) for i in range(5) for r in range(5)}) == 25


def test_summarize_single_value():
    from faircomm.dataio import RunRecord
    recs = [RunRecord(0.5, 0.0, "balance", 0, q, 0.0, 0.0, q, 1, 1, axis_value=0.5)
            for q in (0.25, 0.75)]
    (row,) = summarize(recs, "alpha")
    assert row["modularity_mean"] == 0.5
    assert row["modularity_std"] == pytest.approx(math.sqrt(0.125))
    assert "<svg" in chart_svg([row])


def test_cli_sweep(tmp_path, capsys):
    path = _spec_file(tmp_path, ALPHA_SPEC)
    assert main(["sweep", "--spec", str(path), "--no-timing"]) == 0
    assert "6 runs" in capsys.readouterr().out
    bad = _spec_file(tmp_path, "axis: alpha\nvalues: [3]\ngenerator: {kind: er}\n")
    assert main(["sweep", "--spec", str(bad)]) == 1


def test_dataset_sweep(tmp_path):
    (tmp_path / "g.edges").write_text("0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n")
    (tmp_path / "g.groups").write_text("0 a\n1 a\n2 a\n3 b\n4 b\n5 b\n")
    spec = load_spec(_spec_file(tmp_path, """\
        axis: alpha
        values: [0, 1]
        repeats: 1
        dataset: {graph: g.edges, groups: g.groups, name: toy}
        output: {records: r.csv, summary: s.csv, partitions: parts}
    """))
    records = run_sweep(spec)
    assert [r.community_count for r in records] == [1, 2]
    assert records[0].source == "toy"
    assert (tmp_path / "parts" / "alpha-001-000.txt").read_text() == "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n"


def test_aborted_sweep_keeps_finished_rows(tmp_path, monkeypatch):
    from faircomm import sweep
    spec = load_spec(_spec_file(tmp_path, ALPHA_SPEC))
    real = sweep.mouflon
    calls = []

    def flaky(graph, cfg):
        calls.append(cfg)
        if len(calls) == 3:
            raise RuntimeError("boom")
        return real(graph, cfg)

    monkeypatch.setattr(sweep, "mouflon", flaky)
    with pytest.raises(RuntimeError):
        run_sweep(spec)
    assert len(read_records(spec.records)) == 2
