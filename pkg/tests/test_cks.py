import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cksrank.cks import (
    ConnectionProfile,
    ScoreTable,
    _kse,
    cks_score,
    cks_scores,
    connection_profile,
    kse,
    rank_by_cks,
    write_score_table,
)
from cksrank.community import CommunityPartition, louvain
from cksrank.errors import ContractViolation
from cksrank.graph import Graph, generate_ba
from cksrank.kshell import community_kshell

from conftest import clique_edges
from oracles import cks_naive, random_graph


def profile(**eta):
    return ConnectionProfile(0, 0, {int(k[1:]): v for k, v in eta.items()})


def kse_brute(eta):
    """Entropy term written directly with base-10 logs."""
    tot = sum(eta.values())
    return -sum(s * (c / tot) * math.log10(c / tot) for s, c in eta.items() if c)


def test_kse_worked_examples():
    assert kse(profile(s1=4, s2=2)) == pytest.approx(0.43547500918, abs=1e-9)
    assert kse(profile(s1=2, s2=2, s3=2)) == pytest.approx(0.95424250943, abs=1e-9)
    assert kse(profile(s2=2, s3=2, s4=2)) == pytest.approx(1.43136376416, abs=1e-9)


def test_kse_single_shell_is_zero():
    assert kse(profile(s3=5)) == 0.0


def test_kse_requires_connections():
    with pytest.raises(ContractViolation):
        _kse({1: 0})


def all_profiles(max_eta=6, shells=4):
    for counts in itertools.product(range(max_eta + 1), repeat=shells):
        if 0 < sum(counts) <= max_eta:
            yield {s + 1: c for s, c in enumerate(counts) if c}


def test_kse_bounds_over_small_profiles():
    for eta in all_profiles():
        v = _kse(eta)
        assert v == pytest.approx(kse_brute(eta), abs=1e-12)
        touched = len(eta)
        assert 0.0 <= v <= max(eta) * math.log10(touched) + 1e-12
        if touched == 1:
            assert v == 0.0
        else:
            assert v > 0.0


def test_kse_uniform_attains_bound_for_equal_shells():
    # with every touched shell at the same k-value the bound is tight at uniform
    for touched in range(2, 5):
        for k in (1, 3):
            eta_uniform = {k + 10 * i: 1 for i in range(touched)}
            factor = sum(s for s in eta_uniform) / touched
            assert _kse(eta_uniform) == pytest.approx(factor * math.log10(touched))


def test_shifting_mass_to_higher_shells_increases_kse():
    for eta in all_profiles(max_eta=6, shells=3):
        shifted = {s + 1: c for s, c in eta.items()}
        if len(eta) > 1:
            assert _kse(shifted) > _kse(eta)


def test_connection_profile_on_bridge_fixture(bridge_fixture):
    g, p = bridge_fixture
    cksa = community_kshell(g, p)
    assert cksa.cks.tolist() == [2, 2, 2, 1, 1]
    prof = connection_profile(g, p, cksa, 4, 0)
    assert dict(prof.eta_per_shell) == {1: 1, 2: 1}
    assert prof.eta_total == 2
    with pytest.raises(ContractViolation):
        connection_profile(g, p, cksa, 4, 1)


def test_cks_score_on_bridge_fixture(bridge_fixture):
    g, p = bridge_fixture
    cksa = community_kshell(g, p)
    expected = 4 * (1.5 * math.log10(2)) * 2
    assert cks_score(g, p, cksa, 4) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(3.61236, abs=1e-5)
    # v has no neighbour in its own community, so the toggle changes nothing
    assert cks_score(g, p, cksa, 4, include_own=False) == pytest.approx(expected)


def test_cks_own_community_toggle(bridge_fixture):
    g, p = bridge_fixture
    cksa = community_kshell(g, p)
    # w: one neighbour x (shell 2) in its own community and v outside
    assert cks_score(g, p, cksa, 3) == 0.0
    # y: neighbours x, z (shell 2) and v in community 1 -> single-shell terms
    assert cks_score(g, p, cksa, 1) == 0.0
    # x: own community neighbours y, z (shell 2) and w (shell 1)
    own = 4 * _kse({1: 1, 2: 2}) * 3
    assert cks_score(g, p, cksa, 0) == pytest.approx(own)
    assert cks_score(g, p, cksa, 0, include_own=False) == 0.0


def test_isolated_node_scores_zero():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])
    p = CommunityPartition.from_assignment([0, 0, 0, 1])
    cksa = community_kshell(g, p)
    assert cks_score(g, p, cksa, 3) == 0.0


def test_doubling_community_size_doubles_its_term(bridge_fixture):
    g1, p1 = bridge_fixture
    # pad the 4-node community with 4 disconnected members
    g2 = Graph.from_edges(9, g1.edges())
    p2 = CommunityPartition.from_assignment([0, 0, 0, 0, 1, 0, 0, 0, 0])
    s1 = cks_score(g1, p1, community_kshell(g1, p1), 4)
    s2 = cks_score(g2, p2, community_kshell(g2, p2), 4)
    assert s1 > 0
    assert s2 == pytest.approx(2 * s1)


@pytest.mark.parametrize("include_own", [True, False])
@pytest.mark.parametrize("seed", range(6))
def test_scores_match_naive_loop(seed, include_own):
    g = random_graph(80, 0.07, seed)
    p = louvain(g, seed)
    cksa = community_kshell(g, p)
    fast = cks_scores(g, p, cksa, include_own)
    slow = cks_naive(g, p.assignment.tolist(), cksa.cks.tolist(), include_own)
    assert np.allclose(fast, slow, rtol=1e-12, atol=1e-12)
    assert fast[7] == pytest.approx(cks_score(g, p, cksa, 7, include_own))


@given(st.integers(2, 60), st.floats(0.02, 0.3), st.integers(0, 10**6), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_scores_match_naive_with_random_partitions(n, prob, seed, parts):
    g = random_graph(n, prob, seed)
    rng = np.random.default_rng(seed)
    p = CommunityPartition.from_assignment(rng.integers(0, parts, n))
    cksa = community_kshell(g, p)
    fast = cks_scores(g, p, cksa)
    assert np.all(fast >= 0)
    assert np.allclose(fast, cks_naive(g, p.assignment.tolist(), cksa.cks.tolist()), atol=1e-12)


def test_single_community_reduces_to_intra_entropy():
    g = Graph.from_edges(7, clique_edges(range(4)) + [(3, 4), (4, 5), (5, 6), (6, 4)])
    p = CommunityPartition.from_assignment([0] * 7)
    table = rank_by_cks(g, partition=p)
    cksa = community_kshell(g, p)
    expected = [7 * _kse(connection_profile(g, p, cksa, v, 0).eta_per_shell) * g.degree[v] for v in range(7)]
    assert np.allclose(table.scores, expected)


def test_rank_by_cks_deterministic():
    g = generate_ba(500, 3, 4)
    a, b = rank_by_cks(g, seed=2), rank_by_cks(g, seed=2)
    assert a.method == "CKS"
    assert np.array_equal(a.rank_order, b.rank_order)
    assert np.array_equal(a.scores, b.scores)


def test_score_table_ordering_and_ties():
    t = ScoreTable.from_scores("X", [1.0, 3.0, 3.0, 0.5])
    assert t.rank_order.tolist() == [1, 2, 0, 3]
    assert t.ranks().tolist() == [3, 1, 2, 4]
    assert t.top(2).tolist() == [1, 2]
    with pytest.raises(ContractViolation):
        ScoreTable.from_scores("X", [1.0, float("nan")])


def test_write_score_table_format():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], labels=["p", "q", "r"])
    t = ScoreTable.from_scores("X", [0.1, 2.0 / 3.0, 0.1])
    buf = io.StringIO()
    write_score_table(t, g, buf)
    assert buf.getvalue() == "node,score,rank\nq,0.666666666667,1\np,0.1,2\nr,0.1,3\n"
