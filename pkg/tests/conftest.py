from __future__ import annotations

import pytest

from cksrank.community import CommunityPartition
from cksrank.graph import Graph

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {criterion}" + (f" -- {detail}" if detail else ""))


def clique_edges(nodes):
    nodes = list(nodes)
    return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]


@pytest.fixture
def two_cliques() -> Graph:
    """Two 4-cliques {0..3} and {4..7} joined by the bridge 3-4."""
    return Graph.from_edges(8, clique_edges(range(4)) + clique_edges(range(4, 8)) + [(3, 4)])


@pytest.fixture
def two_cliques_partition() -> CommunityPartition:
    return CommunityPartition.from_assignment([0] * 4 + [1] * 4)


@pytest.fixture
def path5() -> Graph:
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)], labels=list("abcde"))


@pytest.fixture
def bridge_fixture() -> tuple[Graph, CommunityPartition]:
    """Community {x,y,z,w}: triangle x-y-z with pendant w on x, plus an
    outside node v adjacent to w and y only.

    Indices: x=0, y=1, z=2, w=3, v=4.
    """
    g = Graph.from_edges(5, [(0, 1), (1, 2), (0, 2), (0, 3), (4, 3), (4, 1)], labels=list("xyzwv"))
    return g, CommunityPartition.from_assignment([0, 0, 0, 0, 1])
