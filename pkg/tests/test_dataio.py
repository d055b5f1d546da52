import math

import pytest

from faircomm import Partition, build_graph, load_edge_list, load_groups, load_network
from faircomm.dataio import (
    DataError, RunRecord, read_partition, read_records, same_partition, write_graph,
    write_groups, write_partition, write_records,
)


def _write(path, text):
    path.write_text(text)
    return path


def test_edge_list_formats(tmp_path):
    f = _write(tmp_path / "g.txt", "# comment\n10 20\n20,30, 2.5\n\n30\t10\n")
    el = load_edge_list(f)
    assert el.labels == ["10", "20", "30"]
    assert el.edges == [(0, 1, 1.0), (1, 2, 2.5), (2, 0, 1.0)]
    assert el.index["30"] == 2


@pytest.mark.parametrize("text, match", [
    ("1 2\n3\n", ":2:"),
    ("1 2 x\n", "bad weight"),
    ("1 2 -1\n", ">= 0"),
    ("# nothing\n", "no edges"),
])
def test_edge_list_errors(tmp_path, text, match):
    with pytest.raises(DataError, match=match):
        load_edge_list(_write(tmp_path / "g.txt", text))


def test_groups_categorical(tmp_path):
    f = _write(tmp_path / "a.txt", "1 red\n2 blue\n3 red\n4 NA\n5\n")
    gl = load_groups(f)
    assert gl.groups == {"1": 1, "2": 2, "3": 1}
    assert gl.missing == {"4", "5"}
    assert gl.categories == ["red", "blue"] and gl.K == 2


def test_groups_median_split(tmp_path):
    f = _write(tmp_path / "a.txt", "a 10\nb 20\nc 30\nd 40\ne 20\n")
    gl = load_groups(f, "median")
    # median 20: values at or below go to group 1
    assert gl.groups == {"a": 1, "b": 1, "c": 2, "d": 2, "e": 1}
    with pytest.raises(DataError):
        load_groups(_write(tmp_path / "b.txt", "a x\n"), "median")
    with pytest.raises(ValueError):
        load_groups(f, "quantile")


def test_load_network_induced_subgraph(tmp_path):
    edges = _write(tmp_path / "e.txt", "1 2\n2 3\n3 4\n4 1\n")
    groups = _write(tmp_path / "g.txt", "1 a\n2 b\n3 a\n4 ?\n9 b\n")
    g, labels = load_network(edges, groups)
    assert labels == ["1", "2", "3", "9"]
    assert g.n == 4 and g.edge_count() == 2
    assert g.groups == [1, 2, 1, 2]
    assert g.degrees[3] == 0.0


def test_graph_and_groups_round_trip(tmp_path):
    g = build_graph([(0, 1), (1, 2, 2.5), (2, 2, 1.0)], [1, 2, 1])
    write_graph(tmp_path / "e.txt", g)
    write_groups(tmp_path / "g.txt", g.groups)
    h, labels = load_network(tmp_path / "e.txt", tmp_path / "g.txt")
    assert labels == ["0", "1", "2"]
    assert list(h.edges()) == list(g.edges())
    assert h.groups == g.groups


def test_partition_file_is_canonical(tmp_path):
    write_partition(tmp_path / "a.txt", [5, 5, 2, 9], ["10", "2", "1", "3"])
    assert (tmp_path / "a.txt").read_text() == "1 0\n2 1\n3 2\n10 1\n"
    write_partition(tmp_path / "b.txt", [0, 0, 7, 1], ["10", "2", "1", "3"])
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    assert read_partition(tmp_path / "a.txt") == {"1": 0, "2": 1, "3": 2, "10": 1}


def test_read_partition_errors(tmp_path):
    with pytest.raises(DataError):
        read_partition(_write(tmp_path / "p.txt", "1 2 3\n"))
    with pytest.raises(DataError):
        read_partition(_write(tmp_path / "p.txt", "1 x\n"))


def test_same_partition():
    assert same_partition([0, 0, 1], [4, 4, 2])
    assert not same_partition([0, 0, 1], [0, 1, 1])
    assert not same_partition([0, 1], [0, 0])


def test_records_round_trip(tmp_path):
    recs = [
        RunRecord(0.5, 1e-6, "prop_balance", 7, 0.1 + 0.2, 0.5, 0.75, 0.6, 3, 2, 12.5,
                  "2024-01-01T00:00:00+00:00", False, "er", "alpha", 0.5, 0),
        RunRecord(1.0, 0.0, "balance", 8, -0.25, 0.0, 1.0, -0.25, 5, 1),
    ]
    path = tmp_path / "r.csv"
    write_records(path, recs[:1])
    write_records(path, recs[1:], append=True)
    back = read_records(path)
    assert back == recs
    assert path.read_text().count("alpha,theta") == 1


def test_record_floats_are_exact(tmp_path):
    rec = RunRecord(0.1, 1e-6, "balance", 0, math.pi, 1 / 3, 2 / 3, 0.1 + 0.2, 1, 1)
    write_records(tmp_path / "r.csv", [rec])
    assert read_records(tmp_path / "r.csv")[0].modularity == math.pi


def test_partition_assignment_round_trip_through_graph(tmp_path):
    g = build_graph([(0, 1), (2, 3)], [1, 2, 1, 2])
    p = Partition(g, [3, 3, 1, 1])
    write_partition(tmp_path / "p.txt", p.assignment)
    got = read_partition(tmp_path / "p.txt")
    assert same_partition([got[str(i)] for i in range(4)], p.assignment)


def test_minimal_parses(tmp_path):
    assert load_edge_list(_write(tmp_path / "a.txt", "0 1\n1 2\n")).edges == [(0, 1, 1.0), (1, 2, 1.0)]
    el = load_edge_list(_write(tmp_path / "b.txt", "# comment\n3,7,2.5\n"))
    assert el.edges == [(0, 1, 2.5)] and el.labels == ["3", "7"]


def test_median_example(tmp_path):
    gl = load_groups(_write(tmp_path / "a.txt", "n1 25\nn2 40\nn3 31\nn4 19\n"), "median_split")
    assert [gl.groups[k] for k in ("n1", "n2", "n3", "n4")] == [1, 2, 2, 1]


def test_identical_values_degenerate_to_one_group(tmp_path):
    from faircomm import FairnessContext
    edges = _write(tmp_path / "e.txt", "1 2\n2 3\n")
    groups = _write(tmp_path / "g.txt", "1 5\n2 5\n3 5\n")
    g, _ = load_network(edges, groups, "median")
    assert g.K == 1
    with pytest.raises(ValueError):
        FairnessContext.from_graph(g)


def test_one_community_partition_file(tmp_path):
    write_partition(tmp_path / "p.txt", [4, 4, 4], ["a", "b", "c"])
    assert (tmp_path / "p.txt").read_text() == "a 0\nb 0\nc 0\n"


def test_single_record_is_two_lines(tmp_path):
    write_records(tmp_path / "r.csv", [RunRecord(1.0, 0.0, "balance", 0, 0.5, 0.0, 1.0, 0.5, 2, 1)])
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 2
