import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from tbdlab.graphs import (
    NAMED_PATTERNS,
    HostGraph,
    PatternGraph,
    PatternPlans,
    completes_copy,
    count_copies_total,
    count_copies_with_edge,
    count_embeddings,
    every_pair_closes,
    format_pattern,
    load_pattern,
    max_codegree,
    max_pair_copies,
    named_pattern,
    parse_pattern,
    pattern_stats,
)


def cycle(n):
    return HostGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return HostGraph.from_edges(10, outer + spokes + inner)


def test_pattern_stats_examples():
    s = pattern_stats(named_pattern("K3"))
    assert (s.v_H, s.e_H, s.d2, s.two_balanced) == (3, 3, Fraction(2), True)
    assert pattern_stats(named_pattern("K2")).d2 == Fraction(1, 2)
    s = pattern_stats(named_pattern("K4+pendant"))
    assert (s.v_H, s.e_H) == (5, 7)
    assert s.d2 == 2 and s.m2 == Fraction(5, 2)
    assert not s.two_balanced and s.extbal


def test_pattern_stats_known_values():
    assert pattern_stats(named_pattern("C4")).d2 == Fraction(3, 2)
    assert pattern_stats(named_pattern("K4")).m2 == Fraction(5, 2)
    assert pattern_stats(named_pattern("C5")).strictly_two_balanced
    s = pattern_stats(named_pattern("2K2"))
    assert s.d2 == s.m2 == Fraction(1, 2) and not s.extbal
    # P3 satisfies the three-vertex branch of the extension condition
    assert pattern_stats(named_pattern("P3")).extbal
    with pytest.raises(ValueError):
        pattern_stats(PatternGraph.from_edges(3, []))


def test_pattern_validation():
    with pytest.raises(ValueError):
        PatternGraph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        PatternGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        PatternGraph.from_edges(9, [(0, 1)])
    with pytest.raises(ValueError):
        PatternGraph.from_edges(3, [(0, 3)])


def test_pattern_text_format(tmp_path):
    H = parse_pattern("# triangle with a tail\n5\n0 1\n1 2\n2 0\n2 3\n")
    assert H.v == 5 and H.e == 4 and H.degrees[4] == 0
    again = parse_pattern(format_pattern(H))
    assert again == H
    f = tmp_path / "bowtie.txt"
    f.write_text("5\n0 1\n1 2\n0 2\n2 3\n3 4\n2 4\n")
    G = load_pattern(str(f))
    assert G.name == "bowtie" and G.e == 6
    with pytest.raises(KeyError):
        load_pattern("nonexistent-pattern")
    with pytest.raises(ValueError):
        parse_pattern("3\n0 1 2\n")
    with pytest.raises(ValueError):
        parse_pattern("")


def test_aut_counts_of_named_patterns():
    expected = {"K2": 2, "K3": 6, "K4": 24, "K5": 120, "C4": 8, "C5": 10, "C6": 12, "P3": 2, "2K2": 8, "K4+pendant": 6}
    for name in NAMED_PATTERNS:
        assert named_pattern(name).aut_count == expected[name]


def test_completes_copy_examples():
    path = HostGraph.from_edges(3, [(0, 1), (1, 2)])
    assert completes_copy(path, named_pattern("K3"), (0, 2))
    assert path.edge_count == 2 and not path.has_edge(0, 2)
    for name in ("K3", "C4", "2K2", "P3"):
        assert not completes_copy(HostGraph(6), named_pattern(name), (1, 4))
    assert completes_copy(cycle(5), named_pattern("C4"), (0, 2))


def test_single_edge_pattern():
    K2_iso = PatternGraph.from_edges(4, [(0, 1)])
    assert completes_copy(HostGraph(4), K2_iso, (0, 3))
    assert not completes_copy(HostGraph(3), K2_iso, (0, 1))
    assert completes_copy(HostGraph(2), named_pattern("K2"), (0, 1))


def test_count_with_edge_examples():
    K3 = named_pattern("K3")
    assert count_copies_with_edge(HostGraph.complete(4), K3, (0, 1)) == 2
    assert count_copies_with_edge(HostGraph.complete(5), K3, (2, 4)) == 3
    assert count_copies_with_edge(HostGraph(5), K3, (0, 1)) == 0


def test_count_total_examples():
    K4 = HostGraph.complete(4)
    assert count_copies_total(K4, named_pattern("K3")) == 4
    assert count_copies_total(cycle(5), named_pattern("K3")) == 0
    assert count_copies_total(K4, named_pattern("C4")) == 3


def test_max_codegree_examples():
    for n in (2, 5, 9, 70):
        assert max_codegree(HostGraph.complete(n)) == n - 2
    assert max_codegree(HostGraph(7)) == 0
    assert max_codegree(petersen()) == 1


def test_host_graph_operations():
    G = HostGraph(70)
    assert G.add_edge(3, 68) and not G.add_edge(68, 3)
    assert G.has_edge(68, 3) and G.edge_count == 1 and G.deg[68] == 1
    assert G.remove_edge(3, 68) and not G.remove_edge(3, 68)
    assert G.edge_count == 0
    with pytest.raises(ValueError):
        G.add_edge(2, 2)
    with pytest.raises(IndexError):
        G.add_edge(0, 70)
    H = HostGraph.from_edges(70, [(0, 1), (65, 1), (64, 69)])
    assert H.edges() == [(0, 1), (1, 65), (64, 69)]
    assert HostGraph.from_bits(H.bits) == H
    A = H.to_dense()
    assert A.sum() == 6 and A[1, 65] and A[65, 1]


def test_max_pair_copies_and_closure():
    K3 = named_pattern("K3")
    G = HostGraph.complete(6)
    assert max_pair_copies(G, K3.plans, K3.aut_count) == 4
    assert max_pair_copies(G, K3.plans, K3.aut_count, limit=2) >= 2
    assert every_pair_closes(G, K3.existence_plans)
    assert not every_pair_closes(HostGraph.from_edges(4, [(0, 1)]), K3.existence_plans)


def test_family_plans():
    fam = PatternPlans.through_edge([named_pattern("K3"), named_pattern("C4")], all_orientations=False)
    assert set(fam.owner.tolist()) == {0, 1}
    with pytest.raises(ValueError):
        PatternPlans.through_edge([PatternGraph.from_edges(3, [])])


# ---------------------------------------------------------------------------
# properties against the naive oracle
# ---------------------------------------------------------------------------


@st.composite
def small_hosts(draw, n_max=7):
    n = draw(st.integers(2, n_max))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return n, [e for e, m in zip(pairs, mask) if m]


@st.composite
def small_patterns(draw, v_max=5):
    v = draw(st.integers(2, v_max))
    pairs = list(itertools.combinations(range(v), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, m in zip(pairs, mask) if m]
    if not edges:
        edges = [pairs[0]]
    return PatternGraph.from_edges(v, edges)


named = st.sampled_from(sorted(set(NAMED_PATTERNS) - {"K5", "C6", "K4+pendant"}))


@given(small_hosts(), st.one_of(named.map(named_pattern), small_patterns()))
def test_total_count_matches_oracle(host, H):
    n, edges = host
    G = HostGraph.from_edges(n, edges)
    assert count_copies_total(G, H) == oracles.count_copies(n, edges, H.v, sorted(H.edges))


@given(small_hosts(), st.one_of(named.map(named_pattern), small_patterns()), st.data())
def test_count_through_edge_matches_oracle(host, H, data):
    n, edges = host
    G = HostGraph.from_edges(n, edges)
    e = data.draw(st.sampled_from(list(itertools.combinations(range(n), 2))))
    cnt = count_copies_with_edge(G, H, e)
    assert cnt == oracles.copies_through(n, edges, H.v, sorted(H.edges), e)
    assert (cnt >= 1) == completes_copy(G, H, e)
    assert G == HostGraph.from_edges(n, edges)


@given(st.one_of(st.sampled_from(sorted(NAMED_PATTERNS)).map(named_pattern), small_patterns(8)))
def test_aut_count_equals_self_embeddings(H):
    G = HostGraph.from_edges(H.v, H.edges)
    assert count_embeddings(G, H) == H.aut_count
    assert math.factorial(H.v) % H.aut_count == 0
    assert H.aut_count == oracles.automorphisms(H.v, sorted(H.edges))


@given(small_patterns(7))
def test_m2_relations(H):
    s = pattern_stats(H)
    assert s.m2 >= s.d2
    if s.e_H >= 2:
        assert s.two_balanced == (s.m2 == s.d2)
    if s.strictly_two_balanced:
        assert s.two_balanced


@given(small_hosts(12))
def test_codegree_matches_dense(host):
    n, edges = host
    G = HostGraph.from_edges(n, edges)
    A = G.to_dense().astype(int)
    C = A @ A
    np.fill_diagonal(C, 0)
    assert max_codegree(G) == (C.max() if n > 1 else 0)
