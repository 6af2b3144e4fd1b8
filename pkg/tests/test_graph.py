import itertools
import math

import numpy as np
import pytest
from hypothesis import given

from vspc import graph as gr
from vspc.graph import (UNREACHABLE, Graph, GraphError, from_edge_list, hopcounts, spectral_radius)

from conftest import graphs, union_find_components


def test_edge_list_builds_symmetric_rows():
    g = from_edge_list(4, [(0, 1), (1, 2), (2, 3)])
    assert g.link_count == 3
    assert g.degrees == (1, 2, 2, 1)
    assert g.has_edge(2, 1) and not g.has_edge(0, 3)
    assert g.edges() == [(0, 1), (1, 2), (2, 3)]


def test_duplicate_edges_are_idempotent():
    assert from_edge_list(3, [(0, 1), (1, 0), (0, 1)]).link_count == 1


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(-1, 2)]])
def test_bad_edges_rejected(edges):
    with pytest.raises(GraphError):
        from_edge_list(4, edges)


def test_too_many_nodes_rejected():
    with pytest.raises(GraphError):
        gr.empty(gr.MAX_NODES + 1)


def test_with_and_without_edge_round_trip():
    g = gr.path(4)
    assert g.with_edge(0, 3).without_edge(3, 0) == g
    assert g.with_edge(0, 3).link_count == 4


def test_edge_mask_round_trip():
    for g in gr.enumerate_connected_graphs(4):
        assert gr.from_edge_mask(4, g.edge_mask) == g


def test_path_hopcounts():
    h = hopcounts(gr.path(4))
    expected = np.abs(np.subtract.outer(np.arange(4), np.arange(4)))
    assert np.array_equal(h, expected)


def test_disconnected_hopcounts_use_sentinel():
    g = from_edge_list(4, [(0, 1), (2, 3)])
    h = hopcounts(g)
    assert h[0, 2] == UNREACHABLE and h[0, 1] == 1
    assert gr.hop_sum(g, 0) is None
    assert not gr.is_connected(g)
    assert gr.diameter(g) == UNREACHABLE


@pytest.mark.parametrize("g,conn,tree,diam", [
    (gr.star(5), True, True, 2),
    (gr.path(6), True, True, 5),
    (gr.cycle(6), True, False, 3),
    (gr.complete(5), True, False, 1),
    (gr.empty(3), False, False, UNREACHABLE),
])
def test_structure_predicates(g, conn, tree, diam):
    assert gr.is_connected(g) is conn
    assert gr.is_tree(g) is tree
    assert gr.diameter(g) == diam


@given(graphs(max_n=9))
def test_hopcounts_symmetric_with_zero_diagonal(g):
    h = hopcounts(g)
    assert np.array_equal(h, h.T)
    assert (np.diag(h) == 0).all()
    assert ((h == 1) == g.adjacency.astype(bool)).all()


@given(graphs(max_n=9))
def test_connectivity_matches_union_find(g):
    assert gr.is_connected(g) == (union_find_components(g.n, g.edges()) == 1)


@pytest.mark.parametrize("g,lam", [
    (gr.star(5), 2.0),
    (gr.path(5), math.sqrt(3)),
    (gr.complete(4), 3.0),
    (gr.cycle(7), 2.0),
    (gr.path(2), 1.0),
])
def test_spectral_radius_known_values(g, lam):
    assert spectral_radius(g) == pytest.approx(lam, abs=1e-9)


def test_spectral_radius_of_empty_graph_is_zero():
    assert spectral_radius(gr.empty(4)) == 0.0


@given(graphs(max_n=10))
def test_spectral_radius_matches_dense_eigensolver(g):
    ref = float(np.linalg.eigvalsh(g.adjacency).max()) if g.link_count else 0.0
    assert spectral_radius(g) == pytest.approx(ref, abs=1e-8)


def test_spectral_radius_relabel_invariant(rng):
    g = gr.random_connected_graph(8, 0.4, rng)
    base = spectral_radius(g)
    for _ in range(50):
        perm = rng.permutation(8).tolist()
        assert abs(spectral_radius(g.relabel(perm)) - base) < 1e-9


def test_bipartite_graph_does_not_stall():
    # eigenvalues +-lambda_1 would make unshifted power iteration oscillate
    g = from_edge_list(6, [(u, v) for u in range(3) for v in range(3, 6)])
    assert spectral_radius(g) == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("n,count", [(2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)])
def test_cayley_counts(n, count):
    trees = list(gr.enumerate_trees(n))
    assert len(trees) == count
    assert len({t.rows for t in trees}) == count
    assert all(gr.is_tree(t) for t in trees)


def _brute_connected_count(n):
    pairs = list(itertools.combinations(range(n), 2))
    total = 0
    for mask in range(1 << len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        total += union_find_components(n, edges) == 1
    return total


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_connected_counts_match_brute_force(n):
    assert sum(1 for _ in gr.enumerate_connected_graphs(n)) == _brute_connected_count(n)


@pytest.mark.parametrize("n,count", [(3, 4), (4, 38), (5, 728), (6, 26704)])
def test_connected_counts_frozen(n, count):
    assert sum(1 for _ in gr.enumerate_connected_graphs(n)) == count


@pytest.mark.parametrize("n", range(2, 8))
def test_prufer_round_trip(n):
    seen = set()
    for t in gr.enumerate_trees(n):
        seq = gr.prufer_encode(t)
        assert len(seq) == n - 2
        assert gr.prufer_decode(seq, n) == t
        seen.add(seq)
    assert len(seen) == n ** (n - 2)


def test_prufer_encode_rejects_non_tree():
    with pytest.raises(GraphError):
        gr.prufer_encode(gr.cycle(4))


@pytest.mark.parametrize("n", range(3, 9))
def test_tree_spectral_radius_between_path_and_star(n):
    lo = 2 * math.cos(math.pi / (n + 1)) - 1e-10
    hi = math.sqrt(n - 1) + 1e-10
    for t in gr.enumerate_trees(n):
        lam = spectral_radius(t)
        assert lo <= lam <= hi


def test_star_and_path_recognisers():
    assert gr.is_star(gr.star(5, center=3))
    assert not gr.is_star(gr.path(5))
    assert gr.is_path(gr.path(5).relabel([4, 2, 0, 1, 3]))
    assert not gr.is_path(gr.star(5))


def test_parse_edge_list_with_comments():
    g = gr.parse_edge_list("# triangle\n3\n0 1\n1 2  # inline\n\n0 2\n")
    assert g == gr.complete(3)


@pytest.mark.parametrize("text,line", [
    ("3\n0 x\n", 2),
    ("3\n0 1\n1 5\n", 3),
    ("abc\n", 1),
    ("3\n0 1 2\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphError) as err:
        gr.parse_edge_list(text)
    assert err.value.line == line


def test_format_parse_round_trip(rng):
    g = gr.random_connected_graph(7, 0.5, rng)
    assert gr.parse_edge_list(gr.format_edge_list(g)) == g


def test_random_connected_graph_is_connected_and_seeded():
    a = gr.random_connected_graph(10, 0.3, np.random.default_rng(5))
    b = gr.random_connected_graph(10, 0.3, np.random.default_rng(5))
    assert a == b and gr.is_connected(a)


def test_graph_is_hashable_and_frozen():
    g = gr.path(3)
    assert {g: 1}[Graph(3, g.rows)] == 1
    with pytest.raises(AttributeError):
        g.n = 4
