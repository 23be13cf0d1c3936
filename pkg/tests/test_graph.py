import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cksrank.community import louvain
from cksrank.errors import ParameterError, ParseError
from cksrank.graph import (
    UNREACHABLE,
    Graph,
    bfs_distances,
    generate_ba,
    generate_powerlaw_cluster,
    graph_summary,
    parse_edge_list,
    serialize_edge_list,
    write_edge_list,
)

from oracles import clustering_brute, floyd_warshall, random_graph


def assert_well_formed(g: Graph):
    adj = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    for v in range(g.n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0), "sorted, no duplicates"
        assert v not in adj[v]
        for u in nb:
            assert v in adj[u]
    assert int(g.degree.sum()) == 2 * g.m
    assert len(set(g.labels)) == g.n


def test_parse_path():
    g = parse_edge_list(["1 2\n", "2 3\n"])
    assert (g.n, g.m) == (3, 2)
    assert g.labels == ("1", "2", "3")
    assert g.adj == [[1], [0, 2], [1]]


def test_parse_drops_duplicates_and_self_loops():
    g = parse_edge_list(io.StringIO("a b\nb a\na a\n"))
    assert (g.n, g.m) == (2, 1)


def test_parse_directed_input_is_symmetrized():
    g = parse_edge_list(["# directed", "u v", "v w", "w u"], directed_input=True)
    assert g.m == 3
    assert_well_formed(g)


def test_parse_comments_and_blank_lines():
    g = parse_edge_list(["% header", "", "# more", "x y", "   ", "y z"])
    assert (g.n, g.m) == (3, 2)


def test_parse_malformed_line_reports_line_number():
    with pytest.raises(ParseError) as exc:
        parse_edge_list(["1 2", "3", "4 5"])
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_edge_list(["1 2 3"])


def test_parse_empty_input():
    with pytest.raises(ParseError):
        parse_edge_list([])
    with pytest.raises(ParseError):
        parse_edge_list(["# only a comment"])


def test_ba_small_is_tree():
    g = generate_ba(3, 1, seed=11)
    assert (g.n, g.m) == (3, 2)


def test_ba_edge_count_follows_star_seed_convention():
    g = generate_ba(2000, 5, seed=7)
    assert g.n == 2000
    assert g.m == 5 * (2000 - 5)
    assert_well_formed(g)


def test_ba_rejects_bad_params():
    with pytest.raises(ParameterError):
        generate_ba(5, 5, seed=0)
    with pytest.raises(ParameterError):
        generate_ba(5, 0, seed=0)
    with pytest.raises(ParameterError):
        generate_powerlaw_cluster(10, 2, 1.5, seed=0)


def test_generators_are_deterministic():
    a, b = generate_ba(300, 3, seed=5), generate_ba(300, 3, seed=5)
    assert np.array_equal(a.indices, b.indices) and np.array_equal(a.indptr, b.indptr)
    c, d = generate_powerlaw_cluster(300, 3, 0.4, 5), generate_powerlaw_cluster(300, 3, 0.4, 5)
    assert c.edges() == d.edges()
    assert generate_ba(300, 3, seed=6).edges() != a.edges()


def test_pcg_without_triangles_equals_ba():
    for seed in range(5):
        assert generate_powerlaw_cluster(200, 4, 0.0, seed).edges() == generate_ba(200, 4, seed).edges()


def test_pcg_size():
    g = generate_powerlaw_cluster(2000, 5, 0.3, seed=7)
    assert g.n == 2000
    assert abs(g.m - 9963) < 50
    assert_well_formed(g)


def test_pcg_clustering_grows_with_triangle_probability():
    def mean_clustering(p):
        vals = [np.mean(clustering_brute(generate_powerlaw_cluster(500, 3, p, s))) for s in range(1, 21)]
        return float(np.mean(vals))

    c0, c3, c8 = mean_clustering(0.0), mean_clustering(0.3), mean_clustering(0.8)
    assert c0 < c3 < c8


def test_bfs_path():
    g = parse_edge_list(["a b", "b c"])
    assert bfs_distances(g, 0).tolist() == [0, 1, 2]


def test_bfs_unreachable_sentinel():
    g = parse_edge_list(["a b", "c d"])
    d = bfs_distances(g, 0)
    assert d.tolist() == [0, 1, UNREACHABLE, UNREACHABLE]


@pytest.mark.parametrize("seed", range(8))
def test_bfs_matches_floyd_warshall(seed):
    g = random_graph(50, 0.06, seed)
    fw = floyd_warshall(g)
    for s in range(g.n):
        d = bfs_distances(g, s).astype(float)
        d[d == UNREACHABLE] = np.inf
        assert np.array_equal(d, fw[s])


def test_summary_without_partition():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    s = graph_summary(g)
    assert (s.nodes, s.edges, s.communities) == (3, 3, None)


def test_summary_two_triangles_has_two_communities():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert graph_summary(g, louvain(g, 0)).communities == 2


def test_write_edge_list_header_is_comment(tmp_path):
    g = generate_ba(50, 2, 1)
    path = tmp_path / "g.txt"
    write_edge_list(g, path, header="BA test\nseed 1")
    text = path.read_text()
    assert text.startswith("# BA test\n# seed 1\n")
    h = parse_edge_list(text.splitlines())
    assert h.labels == g.labels and h.edges() == g.edges()


@st.composite
def edge_lists(draw):
    n = draw(st.integers(2, 25))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=80))
    labels = draw(st.permutations([f"n{i}" for i in range(n)]))
    return [f"{labels[a]} {labels[b]}" for a, b in pairs]


@given(edge_lists(), st.booleans())
@settings(max_examples=150, deadline=None)
def test_parsed_graphs_are_simple_and_symmetric(lines, directed):
    g = parse_edge_list(lines, directed_input=directed)
    assert_well_formed(g)


@given(edge_lists())
@settings(max_examples=150, deadline=None)
def test_parse_serialize_roundtrip(lines):
    # a self-loop can introduce a label earlier than any edge would
    lines = [ln for ln in lines if ln.split()[0] != ln.split()[1]]
    if not lines:
        return
    g = parse_edge_list(lines)
    h = parse_edge_list(serialize_edge_list(g))
    assert h.labels == g.labels
    assert h.edges() == g.edges()


@given(st.integers(3, 60), st.integers(1, 4), st.floats(0, 1), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_generated_graphs_are_simple(n, m, p, seed):
    if m >= n:
        return
    g = generate_powerlaw_cluster(n, m, p, seed)
    assert_well_formed(g)
    h = parse_edge_list(serialize_edge_list(g))
    assert h.labels == g.labels and h.edges() == g.edges()
