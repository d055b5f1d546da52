import pytest

from faircomm import build_graph

# two triangles joined by the edge 2-3, one colour per triangle
BRIDGED_EDGES = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
BRIDGED_GROUPS = [1, 1, 1, 2, 2, 2]


@pytest.fixture
def bridged():
    return build_graph(BRIDGED_EDGES, BRIDGED_GROUPS)


@pytest.fixture
def two_triangles():
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    return build_graph(edges, [1, 2, 1, 2, 1, 2])


@pytest.fixture
def ten_node_groups():
    # 4 / 4 / 2 nodes over three groups
    return [1, 1, 1, 1, 2, 2, 2, 2, 3, 3]


def pytest_terminal_summary(terminalreporter):
    import acceptance_log
    if acceptance_log.LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=_criterion_order):
            terminalreporter.write_line(line)


def _criterion_order(line):
    label = line.split("criterion ", 1)[1].split(":", 1)[0]
    number = "".join(ch for ch in label if ch.isdigit())
    return int(number), label
