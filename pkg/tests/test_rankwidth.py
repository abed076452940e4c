from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_cut_rank
from entwidth.errors import DomainError, SizeLimitError
from entwidth.graph import Graph, bipartition_from_edge, caterpillar_tree, enumerate_subcubic_trees
from entwidth.rankwidth import (
    greedy_tree,
    minimize_over_trees,
    rank_width_exact,
    rank_width_heuristic,
    width_of_tree,
)


def brute_width_of_tree(graph, tree):
    return max(brute_cut_rank(graph, bipartition_from_edge(tree, e)[0]) for e in tree.edges)


def brute_rank_width(graph):
    return min(brute_width_of_tree(graph, t) for t in enumerate_subcubic_trees(graph.n))


def test_ring_of_six_has_width_two(c6):
    res = rank_width_exact(c6)
    assert res.exact and res.width == 2
    assert width_of_tree(c6, res.tree) == 2
    assert width_of_tree(c6, caterpillar_tree(6)) == 2
    # no tree does better
    assert min(width_of_tree(c6, t) for t in enumerate_subcubic_trees(6)) == 2


def test_path_of_six_has_width_one():
    g = Graph.path(6)
    assert rank_width_exact(g).width == 1
    assert width_of_tree(g, caterpillar_tree(6)) == 1


@pytest.mark.parametrize("n", range(2, 9))
def test_closed_form_families(n):
    assert rank_width_exact(Graph.empty(n)).width == 0
    assert rank_width_exact(Graph.complete(n)).width == 1
    assert rank_width_exact(Graph.star(n)).width == 1


def test_trivial_sizes():
    assert rank_width_exact(Graph.empty(0)).width == 0
    r = rank_width_exact(Graph.empty(1))
    assert r.width == 0 and r.tree is None
    assert rank_width_heuristic(Graph.empty(1)).tree is None


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**15 - 1))
def test_exact_matches_brute_force(n, bits):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    g = Graph.from_edges(n, [p for i, p in enumerate(pairs) if (bits >> i) & 1])
    res = rank_width_exact(g)
    assert res.width == brute_rank_width(g)
    assert brute_width_of_tree(g, res.tree) == res.width
    assert rank_width_heuristic(g).width >= res.width


def test_returns_first_optimal_tree_in_enumeration_order():
    rng = np.random.default_rng(5)
    for _ in range(5):
        g = Graph.random(6, 0.5, rng)
        res = rank_width_exact(g)
        first = next(t for t in enumerate_subcubic_trees(6) if width_of_tree(g, t) == res.width)
        assert res.tree == first


def test_parallel_search_agrees():
    rng = np.random.default_rng(11)
    for _ in range(3):
        g = Graph.random(8, 0.5, rng)
        a = rank_width_exact(g, threads=1)
        b = rank_width_exact(g, threads=2)
        assert a.width == b.width
        assert width_of_tree(g, b.tree) == b.width


def test_size_limit():
    with pytest.raises(SizeLimitError):
        rank_width_exact(Graph.path(11))
    assert rank_width_exact(Graph.path(5), limit=5).width == 1
    with pytest.raises(SizeLimitError):
        rank_width_exact(Graph.path(6), limit=5)


def test_heuristic_on_large_graph():
    g = Graph.path(30)
    res = rank_width_heuristic(g)
    assert not res.exact and res.width == 1
    assert width_of_tree(g, res.tree) == res.width


def test_width_of_tree_rejects_mismatch(c6):
    with pytest.raises(DomainError):
        width_of_tree(c6, caterpillar_tree(5))


def test_greedy_tree_shape():
    t = greedy_tree(5, lambda cluster: 0)
    assert t.n == 5 and len(t.edges) == 7
    with pytest.raises(DomainError):
        greedy_tree(1, lambda cluster: 0)


def test_minimize_over_trees_generic():
    # cost = size of the smaller side: the best any tree can do on 6 leaves is 2
    def cost(m):
        return min(bin(m).count("1"), 6 - bin(m).count("1"))

    best, tree = minimize_over_trees(6, cost)
    assert best == 2
    assert max(cost(m) for m in tree.edge_masks()) == 2
