"""Simple graphs, subcubic trees and the edge-to-bipartition machinery.

Parties are 0-indexed. In a :class:`SubcubicTree` with ``n`` leaves the
vertex ``i < n`` is the leaf carrying party ``i`` and the inner vertices are
numbered ``n .. 2n-3``.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, FormatError

__all__ = [
    "Graph",
    "SubcubicTree",
    "bipartition_from_edge",
    "enumerate_subcubic_trees",
    "caterpillar_tree",
    "count_subcubic_trees",
    "read_graph",
    "write_graph",
    "parse_graph",
    "format_graph",
    "read_tree",
    "write_tree",
    "parse_tree",
    "format_tree",
]

Edge = tuple[int, int]


def _norm(e: Sequence[int]) -> Edge:
    u, v = int(e[0]), int(e[1])
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``row_masks[a]`` has bit ``b`` set iff ``{a, b}`` is an edge.
    """

    n: int
    row_masks: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 0 or len(self.row_masks) != self.n:
            raise DomainError("row_masks must have one entry per vertex")
        for a, row in enumerate(self.row_masks):
            if row >> self.n:
                raise DomainError(f"vertex {a} has a neighbour outside 0..{self.n - 1}")
            if (row >> a) & 1:
                raise DomainError(f"self-loop at vertex {a}")
            b = row
            j = 0
            while b:
                if b & 1 and not (self.row_masks[j] >> a) & 1:
                    raise DomainError(f"adjacency is not symmetric at ({a}, {j})")
                b >>= 1
                j += 1

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        rows = [0] * n
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if not (0 <= a < n and 0 <= b < n):
                raise DomainError(f"edge ({a}, {b}) has an endpoint outside 0..{n - 1}")
            if a == b:
                raise DomainError(f"self-loop at vertex {a}")
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, tuple(rows))

    @classmethod
    def from_adjacency(cls, adjacency) -> Graph:
        gamma = np.asarray(adjacency)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise DomainError("adjacency must be a square matrix")
        if gamma.size and not np.isin(gamma, (0, 1)).all():
            raise DomainError("adjacency entries must be 0 or 1")
        n = gamma.shape[0]
        rows = tuple(int(sum(1 << b for b in range(n) if gamma[a, b])) for a in range(n))
        return cls(n, rows)

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, (0,) * n)

    @classmethod
    def path(cls, n: int) -> Graph:
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> Graph:
        if n < 3:
            raise DomainError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls.from_edges(n, ((a, b) for a in range(n) for b in range(a + 1, n)))

    @classmethod
    def star(cls, n: int) -> Graph:
        """Vertex 0 joined to every other vertex."""
        return cls.from_edges(n, ((0, b) for b in range(1, n)))

    @classmethod
    def random(cls, n: int, p: float, rng: np.random.Generator) -> Graph:
        edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
        return cls.from_edges(n, edges)

    @cached_property
    def adjacency(self) -> np.ndarray:
        gamma = np.zeros((self.n, self.n), dtype=np.uint8)
        for a, row in enumerate(self.row_masks):
            for b in range(self.n):
                gamma[a, b] = (row >> b) & 1
        return gamma

    def neighbors(self, a: int) -> list[int]:
        row = self.row_masks[a]
        return [b for b in range(self.n) if (row >> b) & 1]

    def edges(self) -> list[Edge]:
        return [(a, b) for a in range(self.n) for b in self.neighbors(a) if a < b]

    def has_edge(self, a: int, b: int) -> bool:
        return bool((self.row_masks[a] >> b) & 1)

    @property
    def num_edges(self) -> int:
        return sum(bin(r).count("1") for r in self.row_masks) // 2


@dataclass(frozen=True)
class SubcubicTree:
    """Leaf-labelled tree whose vertices all have degree 1 or 3."""

    n: int
    edges: tuple[Edge, ...]
    _adj: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        n = self.n
        if n < 2:
            raise DomainError("a subcubic tree needs at least 2 leaves")
        edges = tuple(sorted(_norm(e) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        nv = 2 * n - 2
        if len(edges) != 2 * n - 3:
            raise DomainError(f"a subcubic tree with {n} leaves has {2 * n - 3} edges, got {len(edges)}")
        if len(set(edges)) != len(edges):
            raise DomainError("duplicate edge")
        adj: dict[int, list[int]] = {v: [] for v in range(nv)}
        for u, v in edges:
            if u == v or not (0 <= u < nv and 0 <= v < nv):
                raise DomainError(f"edge ({u}, {v}) is invalid for vertex ids 0..{nv - 1}")
            adj[u].append(v)
            adj[v].append(u)
        for v, nbrs in adj.items():
            want = 1 if v < n else 3
            if len(nbrs) != want:
                kind = "leaf" if v < n else "inner vertex"
                raise DomainError(f"{kind} {v} has degree {len(nbrs)}, expected {want}")
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != nv:
            raise DomainError("tree is not connected")
        object.__setattr__(self, "_adj", {v: tuple(sorted(nb)) for v, nb in adj.items()})

    @property
    def num_vertices(self) -> int:
        return 2 * self.n - 2

    @property
    def leaves(self) -> range:
        return range(self.n)

    @property
    def internal_vertices(self) -> range:
        return range(self.n, 2 * self.n - 2)

    def is_leaf(self, v: int) -> bool:
        return v < self.n

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbours of ``v`` in increasing id order."""
        return self._adj[v]

    def is_open_edge(self, e: Sequence[int]) -> bool:
        return e[0] < self.n or e[1] < self.n

    def inner_edges(self) -> list[Edge]:
        return [e for e in self.edges if not self.is_open_edge(e)]

    def open_edges(self) -> list[Edge]:
        return [e for e in self.edges if self.is_open_edge(e)]

    def has_edge(self, e: Sequence[int]) -> bool:
        return _norm(e) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def side_leaves(self, u: int, v: int) -> tuple[int, ...]:
        """Leaves reachable from ``u`` once the edge ``{u, v}`` is removed, sorted."""
        if not self.has_edge((u, v)):
            raise DomainError(f"({u}, {v}) is not an edge of the tree")
        return self._side(u, v)

    def _side(self, u: int, v: int) -> tuple[int, ...]:
        out = []
        stack = [(u, v)]
        while stack:
            x, parent = stack.pop()
            if x < self.n:
                out.append(x)
            for w in self._adj[x]:
                if w != parent:
                    stack.append((w, x))
        return tuple(sorted(out))

    def edge_masks(self) -> list[int]:
        """For every edge ``(u, v)`` the bitmask of leaves on the ``u`` side."""
        masks = []
        for u, v in self.edges:
            m = 0
            for leaf in self._side(u, v):
                m |= 1 << leaf
            masks.append(m)
        return masks


def bipartition_from_edge(tree: SubcubicTree, edge: Sequence[int]) -> tuple[frozenset[int], frozenset[int]]:
    """Split the parties by deleting ``edge``; the first set is the side of ``edge[0]``."""
    u, v = int(edge[0]), int(edge[1])
    a = frozenset(tree.side_leaves(u, v))
    return a, frozenset(range(tree.n)) - a


def count_subcubic_trees(n: int) -> int:
    """Number of leaf-labelled subcubic trees, ``(2n-5)!!`` for ``n >= 3``."""
    if n < 2:
        raise DomainError("n must be at least 2")
    total = 1
    for k in range(3, 2 * n - 4, 2):
        total *= k
    return total


def _insert_leaf(edges: list[Edge], index: int, leaf: int, new_vertex: int) -> list[Edge]:
    u, v = edges[index]
    out = list(edges)
    out[index] = (u, new_vertex)
    out.append((new_vertex, v))
    out.append((new_vertex, leaf))
    return out


def _seed_edges(n: int) -> list[Edge]:
    if n == 2:
        return [(0, 1)]
    return [(0, n), (1, n), (2, n)]


def enumerate_subcubic_trees(n: int) -> Iterator[SubcubicTree]:
    """Yield every leaf-labelled subcubic tree on ``n`` leaves exactly once.

    Trees are grown by inserting leaf ``k`` onto each edge of the tree over
    leaves ``0..k-1`` in turn, which fixes a reproducible order.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    if n <= 3:
        yield SubcubicTree(n, tuple(_seed_edges(n)))
        return

    def grow(edges: list[Edge], k: int) -> Iterator[SubcubicTree]:
        if k == n:
            yield SubcubicTree(n, tuple(edges))
            return
        w = n + k - 2
        for i in range(len(edges)):
            yield from grow(_insert_leaf(edges, i, k, w), k + 1)

    yield from grow(_seed_edges(n), 3)


def caterpillar_tree(n: int) -> SubcubicTree:
    """Path of ``n-2`` inner vertices with leaves hung off in label order."""
    if n < 2:
        raise DomainError("n must be at least 2")
    if n == 2:
        return SubcubicTree(2, ((0, 1),))
    if n == 3:
        return SubcubicTree(3, ((0, 3), (1, 3), (2, 3)))
    spine = list(range(n, 2 * n - 2))
    edges = [(0, spine[0]), (1, spine[0])]
    for i in range(1, n - 3):
        edges.append((i + 1, spine[i]))
    edges += [(n - 2, spine[-1]), (n - 1, spine[-1])]
    edges += [(spine[i], spine[i + 1]) for i in range(len(spine) - 1)]
    return SubcubicTree(n, tuple(edges))


# --- plain-text formats -----------------------------------------------------


def _content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ints(tokens: list[str], count: int, lineno: int, path: str | None) -> list[int]:
    if len(tokens) != count:
        raise FormatError(f"expected {count} integers, got {len(tokens)}", lineno, path)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"not an integer in {' '.join(tokens)!r}", lineno, path) from None


def parse_graph(text: str, path: str | None = None) -> Graph:
    """Parse ``n m`` followed by ``m`` lines ``a b`` with ``0 <= a < b < n``."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty graph file", None, path)
    lineno, tokens = lines[0]
    n, m = _ints(tokens, 2, lineno, path)
    if n < 0 or m < 0:
        raise FormatError("n and m must be non-negative", lineno, path)
    body = lines[1:]
    if len(body) != m:
        where = body[-1][0] if len(body) > m else (body[-1][0] if body else lineno)
        raise FormatError(f"header announces {m} edges, found {len(body)}", where, path)
    edges = []
    seen = set()
    for lineno, tokens in body:
        a, b = _ints(tokens, 2, lineno, path)
        if not (0 <= a < b < n):
            raise FormatError(f"edge '{a} {b}' violates 0 <= a < b < {n}", lineno, path)
        if (a, b) in seen:
            raise FormatError(f"duplicate edge '{a} {b}'", lineno, path)
        seen.add((a, b))
        edges.append((a, b))
    return Graph.from_edges(n, edges)


def format_graph(graph: Graph, comment: str | None = None) -> str:
    edges = graph.edges()
    out = [f"{graph.n} {len(edges)}"] + [f"{a} {b}" for a, b in edges]
    if comment:
        out += [f"# {line}" for line in comment.splitlines()]
    return "\n".join(out) + "\n"


def parse_tree(text: str, path: str | None = None) -> SubcubicTree:
    """Parse ``n`` followed by ``2n-3`` lines ``u v`` over vertex ids ``0..2n-3``."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty tree file", None, path)
    lineno, tokens = lines[0]
    (n,) = _ints(tokens, 1, lineno, path)
    if n < 2:
        raise FormatError("a tree file needs n >= 2", lineno, path)
    body = lines[1:]
    if len(body) != 2 * n - 3:
        where = body[-1][0] if body else lineno
        raise FormatError(f"expected {2 * n - 3} edges for n={n}, found {len(body)}", where, path)
    edges = []
    for lineno, tokens in body:
        u, v = _ints(tokens, 2, lineno, path)
        if not (0 <= u <= 2 * n - 3 and 0 <= v <= 2 * n - 3):
            raise FormatError(f"vertex id out of range 0..{2 * n - 3}", lineno, path)
        edges.append((u, v))
    try:
        return SubcubicTree(n, tuple(edges))
    except DomainError as exc:
        raise FormatError(f"not a subcubic tree: {exc}", None, path) from exc


def format_tree(tree: SubcubicTree, comment: str | None = None) -> str:
    out = [str(tree.n)] + [f"{u} {v}" for u, v in tree.edges]
    if comment:
        out += [f"# {line}" for line in comment.splitlines()]
    return "\n".join(out) + "\n"


def read_graph(path: str | os.PathLike) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read(), str(path))


def write_graph(graph: Graph, path: str | os.PathLike, comment: str | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(graph, comment))


def read_tree(path: str | os.PathLike) -> SubcubicTree:
    with open(path) as fh:
        return parse_tree(fh.read(), str(path))


def write_tree(tree: SubcubicTree, path: str | os.PathLike, comment: str | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_tree(tree, comment))
