from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tree
from entwidth.errors import DomainError, FormatError
from entwidth.graph import (
    Graph,
    SubcubicTree,
    bipartition_from_edge,
    caterpillar_tree,
    count_subcubic_trees,
    enumerate_subcubic_trees,
    format_graph,
    format_tree,
    parse_graph,
    parse_tree,
    read_graph,
    read_tree,
    write_graph,
    write_tree,
)


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def splits(tree: SubcubicTree) -> frozenset[frozenset[int]]:
    """Set of leaf splits; identifies a leaf-labelled unrooted tree."""
    full = frozenset(range(tree.n))
    out = set()
    for e in tree.edges:
        side, _ = bipartition_from_edge(tree, e)
        out.add(min(side, full - side, key=lambda s: sorted(s)))
    return frozenset(out)


def test_graph_constructors():
    g = Graph.cycle(6)
    assert g.edges() == [(0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)]
    assert Graph.path(4).num_edges == 3
    assert Graph.complete(5).num_edges == 10
    assert Graph.star(5).neighbors(0) == [1, 2, 3, 4]
    assert Graph.empty(3).num_edges == 0
    adj = g.adjacency
    assert np.array_equal(adj, adj.T) and adj.trace() == 0
    assert Graph.from_adjacency(adj) == g
    r = Graph.random(7, 0.5, np.random.default_rng(1))
    assert r == Graph.random(7, 0.5, np.random.default_rng(1))


def test_graph_rejects_bad_input():
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(DomainError):
        Graph.from_adjacency(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", range(2, 9))
def test_enumeration_count_and_distinct(n):
    trees = list(enumerate_subcubic_trees(n))
    assert len(trees) == double_factorial(2 * n - 5) == count_subcubic_trees(n)
    if n <= 7:
        assert len({splits(t) for t in trees}) == len(trees)


def test_enumeration_order_is_reproducible():
    a = [t.edges for t in enumerate_subcubic_trees(6)]
    b = [t.edges for t in enumerate_subcubic_trees(6)]
    assert a == b


def test_caterpillar_six_leaves():
    t = caterpillar_tree(6)
    assert t.edges == ((0, 6), (1, 6), (2, 7), (3, 8), (4, 9), (5, 9), (6, 7), (7, 8), (8, 9))
    assert t.inner_edges() == [(6, 7), (7, 8), (8, 9)]
    cuts = [bipartition_from_edge(t, e)[0] for e in t.inner_edges()]
    assert cuts == [frozenset({0, 1}), frozenset({0, 1, 2}), frozenset({0, 1, 2, 3})]
    assert bipartition_from_edge(t, (7, 8)) == (frozenset({0, 1, 2}), frozenset({3, 4, 5}))
    assert t.side_leaves(8, 7) == (3, 4, 5)


@pytest.mark.parametrize("n", range(2, 10))
def test_caterpillar_is_valid(n):
    t = caterpillar_tree(n)
    assert len(t.edges) == 2 * n - 3
    assert all(len(t.neighbors(v)) == 3 for v in t.internal_vertices)


def test_tree_validation():
    with pytest.raises(DomainError):
        SubcubicTree(4, ((0, 4), (1, 4), (2, 5), (3, 5)))  # too few edges
    with pytest.raises(DomainError):
        SubcubicTree(4, ((0, 4), (1, 4), (2, 4), (3, 5), (4, 5)))  # degree 4
    with pytest.raises(DomainError):
        SubcubicTree(1, ())
    with pytest.raises(DomainError):
        caterpillar_tree(6).side_leaves(0, 1)


@settings(max_examples=40)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_bipartitions_partition_the_leaves(n, seed):
    t = random_tree(n, np.random.default_rng(seed))
    for e, mask in zip(t.edges, t.edge_masks()):
        a, b = bipartition_from_edge(t, e)
        assert a | b == frozenset(range(n)) and not a & b
        assert a and b
        side = {v for v in range(n) if (mask >> v) & 1}
        assert side in (set(a), set(b))
        if t.is_open_edge(e):
            assert min(len(a), len(b)) == 1


def test_graph_format_roundtrip(tmp_path):
    g = Graph.cycle(6)
    text = format_graph(g, "ring\nsecond line")
    assert text.startswith("6 6\n0 1\n")
    assert parse_graph(text) == g
    write_graph(g, tmp_path / "g.txt")
    assert read_graph(tmp_path / "g.txt") == g


def test_tree_format_roundtrip(tmp_path):
    t = caterpillar_tree(7)
    assert parse_tree(format_tree(t, "note")) == t
    write_tree(t, tmp_path / "t.txt", "cfg")
    assert read_tree(tmp_path / "t.txt") == t


@settings(max_examples=40)
@given(st.integers(0, 8), st.integers(0, 2**28 - 1))
def test_graph_text_roundtrip_property(n, bits):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    g = Graph.from_edges(n, [p for i, p in enumerate(pairs) if (bits >> i) & 1])
    assert parse_graph(format_graph(g)) == g


@pytest.mark.parametrize(
    "text, line",
    [
        ("3 1\n0 3\n", 2),
        ("3 2\n0 1\n", 2),
        ("# header\n3 1\n\n1 x\n", 4),
        ("3 1\n2 1\n", 2),
        ("3 2\n0 1\n0 1\n", 3),
        ("3\n", 1),
    ],
)
def test_graph_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(FormatError) as info:
        parse_graph(text, "g.txt")
    assert info.value.line == line
    assert str(info.value).startswith(f"g.txt:{line}:")


def test_tree_parse_errors():
    with pytest.raises(FormatError) as info:
        parse_tree("4\n0 4\n1 4\n2 5\n3 5\n")
    assert info.value.line == 5
    with pytest.raises(FormatError):
        parse_tree("4\n0 4\n1 4\n2 4\n3 5\n4 5\n")
    with pytest.raises(FormatError):
        parse_tree("")
    with pytest.raises(FormatError) as info:
        parse_tree("3\n0 3\n1 9\n2 3\n")
    assert info.value.line == 3
