import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from topomatch.errors import (
    DuplicateEdgeError,
    NonFiniteWeightError,
    NoPathError,
    PathLimitError,
    SelfLoopError,
)
from topomatch.graph import (
    build_graph,
    enumerate_simplexes,
    paths_with_hops,
    shortest_hop_path,
)

from conftest import er, graphs


def complete(n, w=0.5):
    return build_graph((u, v, w) for u, v in itertools.combinations(range(n), 2))


# -- build_graph --------------------------------------------------------------

def test_single_edge():
    g = build_graph([(0, 1, 0.5)])
    assert g.node_count == 2 and g.edge_count == 1
    assert g.weight(0, 1) == 0.5 == g.weight(1, 0)
    assert g.neighbors(0) == {1}


def test_empty_graph():
    g = build_graph([])
    assert g.node_count == 0 and g.edge_count == 0


def test_duplicate_pair_rejected():
    with pytest.raises(DuplicateEdgeError):
        build_graph([(0, 1, 0.5), (1, 0, 0.5)])


def test_self_loop_and_nonfinite():
    with pytest.raises(SelfLoopError):
        build_graph([(2, 2, 1.0)])
    with pytest.raises(NonFiniteWeightError):
        build_graph([(0, 1, math.nan)])
    with pytest.raises(NonFiniteWeightError):
        build_graph([(0, 1, math.inf)])


def test_isolated_ids_counted():
    g = build_graph([(0, 4, 1.0)])
    assert g.node_count == 5
    assert g.degree(2) == 0


def test_graph_is_frozen():
    g = build_graph([(0, 1, 0.5)])
    with pytest.raises(AttributeError):
        g._n = 3


@given(graphs())
def test_neighbors_match_edges(g):
    for v in g.nodes():
        assert g.neighbors(v) == {u for e in g.edges for u in e if v in e and u != v}
    assert all(g.has_edge(v, u) for u, v in g.edges)
    assert set(g.weights()) == set(g.edges)


# -- simplexes ----------------------------------------------------------------

def test_simplex_counts_small():
    assert enumerate_simplexes(complete(3), 2) == [(0, 1, 2)]
    assert len(enumerate_simplexes(complete(4), 2)) == 4
    assert enumerate_simplexes(complete(4), 3) == [(0, 1, 2, 3)]


def naive_cliques(g, p):
    return [
        s for s in itertools.combinations(range(g.node_count), p + 1)
        if all(g.has_edge(u, v) for u, v in itertools.combinations(s, 2))
    ]


@given(graphs(max_nodes=12), st.integers(1, 4))
def test_simplexes_equal_naive_scan(g, p):
    found = enumerate_simplexes(g, p)
    assert found == naive_cliques(g, p)
    for s in found:
        assert all(g.has_edge(u, v) for u, v in itertools.combinations(s, 2))


def test_simplexes_naive_30_nodes():
    g = er(30, 0.3, 11)
    for p in (2, 3):
        assert enumerate_simplexes(g, p) == naive_cliques(g, p)


def triangle_triple_loop(g):
    n = g.node_count
    return sum(
        1 for a in range(n) for b in range(a + 1, n) if g.has_edge(a, b)
        for c in range(b + 1, n) if g.has_edge(a, c) and g.has_edge(b, c)
    )


def test_er_triangle_count_matches_triple_loop():
    g = er(100, 0.1, 5)
    assert len(enumerate_simplexes(g, 2)) == triangle_triple_loop(g)


def test_er_triangle_mean_near_expectation():
    counts = [len(enumerate_simplexes(er(100, 0.1, s), 2)) for s in range(200)]
    mean = sum(counts) / len(counts)
    sd = (sum((c - mean) ** 2 for c in counts) / (len(counts) - 1)) ** 0.5
    expected = math.comb(100, 3) * 0.1**3
    assert abs(mean - expected) <= 3 * sd / len(counts) ** 0.5


# -- paths --------------------------------------------------------------------

def chain(n):
    return build_graph((i, i + 1, 1.0) for i in range(n - 1))


def test_shortest_path_chain():
    assert shortest_hop_path(chain(3), {0}, {2}) == (0, 1, 2)


def test_shortest_path_between_two_triangle_simplexes(two_triangle):
    assert shortest_hop_path(two_triangle, {3, 8, 9}, {6, 11, 12}) == (8, 13, 12)


def test_shortest_path_disconnected():
    g = build_graph([(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(NoPathError):
        shortest_hop_path(g, {0}, {3})


@given(graphs(max_nodes=9, min_nodes=2), st.data())
def test_shortest_path_is_lexicographic_minimum(g, data):
    nodes = list(g.nodes())
    src = set(data.draw(st.lists(st.sampled_from(nodes), min_size=1, max_size=3)))
    rest = [v for v in nodes if v not in src]
    if not rest:
        return
    dst = set(data.draw(st.lists(st.sampled_from(rest), min_size=1, max_size=3)))
    G = nx.Graph(list(g.edges))
    G.add_nodes_from(nodes)
    best = None
    for s in src:
        for t in dst:
            if nx.has_path(G, s, t):
                for p in nx.all_shortest_paths(G, s, t):
                    key = (len(p), tuple(p))
                    best = key if best is None or key < best else best
    if best is None:
        with pytest.raises(NoPathError):
            shortest_hop_path(g, src, dst)
        return
    path = shortest_hop_path(g, src, dst)
    assert (len(path), path) == best
    # no shorter path exists for any smaller hop count
    for h in range(len(path) - 1):
        assert not any(paths_with_hops(g, s, t, h) for s in src for t in dst)


def cycle(n):
    return build_graph((i, (i + 1) % n, 1.0) for i in range(n))


def test_paths_on_four_cycle():
    assert paths_with_hops(cycle(4), 0, 2, 2) == [(0, 1, 2), (0, 3, 2)]


def test_paths_identity():
    assert paths_with_hops(cycle(4), 1, 1, 0) == [(1,)]


def brute_paths(g, s, t, hops):
    out = []

    def rec(path):
        if len(path) == hops + 1:
            if path[-1] == t:
                out.append(tuple(path))
            return
        for x in range(g.node_count):
            if x not in path and g.has_edge(path[-1], x):
                rec(path + [x])

    rec([s])
    return sorted(out)


def test_paths_k4_against_recursion():
    g = complete(4)
    for s, t in itertools.permutations(range(4), 2):
        assert paths_with_hops(g, s, t, 3) == brute_paths(g, s, t, 3)


@given(graphs(max_nodes=8, min_nodes=2), st.integers(0, 5), st.data())
def test_paths_against_recursion(g, hops, data):
    s = data.draw(st.sampled_from(list(g.nodes())))
    t = data.draw(st.sampled_from(list(g.nodes())))
    if s == t:
        assert paths_with_hops(g, s, t, hops) == ([(s,)] if hops == 0 else [])
    else:
        assert paths_with_hops(g, s, t, hops) == brute_paths(g, s, t, hops)


def test_path_cap():
    with pytest.raises(PathLimitError):
        paths_with_hops(complete(8), 0, 1, 6, cap=10)


def test_queries_are_pure():
    g = er(40, 0.2, 1)
    assert enumerate_simplexes(g, 2) == enumerate_simplexes(g, 2)
    assert shortest_hop_path(g, {0}, {5}) == shortest_hop_path(g, {0}, {5})
    assert paths_with_hops(g, 0, 5, 3) == paths_with_hops(g, 0, 5, 3)
