"""Rank width of graphs: exact branch-and-bound search and a greedy upper bound."""

from __future__ import annotations

import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import DomainError, SizeLimitError
from .gf2 import cut_rank, rank_of_rows
from .graph import Graph, SubcubicTree, _insert_leaf, _seed_edges, enumerate_subcubic_trees

__all__ = [
    "WidthResult",
    "DEFAULT_EXACT_LIMIT",
    "width_of_tree",
    "rank_width_exact",
    "rank_width_heuristic",
    "greedy_tree",
    "minimize_over_trees",
]

DEFAULT_EXACT_LIMIT = 10


@dataclass(frozen=True)
class WidthResult:
    width: int
    tree: SubcubicTree | None
    exact: bool


def width_of_tree(graph: Graph, tree: SubcubicTree) -> int:
    """Largest cut-rank over the bipartitions induced by the edges of ``tree``."""
    if tree.n != graph.n:
        raise DomainError(f"tree has {tree.n} leaves but the graph has {graph.n} vertices")
    full = (1 << graph.n) - 1
    best = 0
    for mask in tree.edge_masks():
        comp = full & ~mask
        r = rank_of_rows(graph.row_masks[v] & comp for v in range(graph.n) if (mask >> v) & 1)
        best = max(best, r)
    return best


class _PrefixCutRanks:
    """Cut-ranks inside the induced subgraph on leaves ``0..k-1``, memoised."""

    def __init__(self, graph: Graph):
        self.rows = graph.row_masks
        self.cache: dict[tuple[int, int], int] = {}

    def __call__(self, k: int, mask: int) -> int:
        key = (k, mask)
        hit = self.cache.get(key)
        if hit is None:
            comp = ((1 << k) - 1) & ~mask
            hit = rank_of_rows(self.rows[v] & comp for v in range(k) if (mask >> v) & 1)
            self.cache[key] = hit
        return hit


@dataclass
class _Partial:
    """Tree over leaves ``0..k-1`` during leaf insertion.

    ``child[i]`` is the endpoint of ``edges[i]`` farther from leaf 0 and
    ``masks[i]`` the leaves below that endpoint.
    """

    edges: list[tuple[int, int]]
    child: list[int]
    masks: list[int]
    k: int

    @classmethod
    def seed(cls, n: int) -> _Partial:
        if n == 2:
            return cls([(0, 1)], [1], [0b10], 2)
        c = n
        return cls(_seed_edges(n), [c, 1, 2], [0b110, 0b010, 0b100], 3)

    def insert(self, index: int, n: int) -> _Partial:
        k = self.k
        bit = 1 << k
        w = n + k - 2
        u, v = self.edges[index]
        mi = self.masks[index]
        masks = [m | bit if (mi & ~m) == 0 else m for m in self.masks]
        child = list(self.child)
        if self.child[index] == v:
            masks[index] = mi | bit
            child[index] = w
            new_masks = [mi, bit]
            new_child = [v, k]
        else:
            masks[index] = mi
            child[index] = u
            new_masks = [mi | bit, bit]
            new_child = [w, k]
        return _Partial(
            _insert_leaf(self.edges, index, k, w),
            child + new_child,
            masks + new_masks,
            k + 1,
        )


def _partial_width(p: _Partial, crk: _PrefixCutRanks, bound: int) -> int:
    """Width of the partial tree, or ``bound`` as soon as it is reached."""
    best = 0
    for m in p.masks:
        r = crk(p.k, m)
        if r >= bound:
            return bound
        if r > best:
            best = r
    return best


def _branch_and_bound(
    graph: Graph, start: _Partial, bound: int, floor: int
) -> tuple[int, list[tuple[int, int]] | None]:
    """First tree in canonical order with width below ``bound``, refined to the minimum."""
    n = graph.n
    crk = _PrefixCutRanks(graph)
    best = bound
    best_edges: list[tuple[int, int]] | None = None

    def visit(p: _Partial) -> bool:
        nonlocal best, best_edges
        if p.k == n:
            w = _partial_width(p, crk, best)
            if w < best:
                best, best_edges = w, p.edges
            return best <= floor
        for i in range(len(p.edges)):
            q = p.insert(i, n)
            if _partial_width(q, crk, best) < best and visit(q):
                return True
        return False

    if _partial_width(start, crk, best) < best:
        visit(start)
    return best, best_edges


def _frontier(n: int, depth_leaves: int) -> list[_Partial]:
    level = [_Partial.seed(n)]
    while level[0].k < depth_leaves:
        level = [p.insert(i, n) for p in level for i in range(len(p.edges))]
    return level


def _search_task(args):
    graph, partial, bound, floor = args
    return _branch_and_bound(graph, partial, bound, floor)


def rank_width_exact(graph: Graph, limit: int = DEFAULT_EXACT_LIMIT, threads: int = 1) -> WidthResult:
    """Exact rank width by exhaustive search over subcubic trees.

    A partial tree over leaves ``0..k-1`` is abandoned once its width inside
    the induced subgraph reaches the best width found so far; cut-ranks can
    only grow when leaves are added, so no completion could do better. Ties
    go to the first optimal tree in :func:`enumerate_subcubic_trees` order.
    """
    n = graph.n
    if n > limit:
        raise SizeLimitError(
            f"exact rank width is limited to n <= {limit} (got n={n}); "
            "use rank_width_heuristic or raise the limit"
        )
    if n < 2:
        return WidthResult(0, None, True)
    floor = 1 if graph.num_edges else 0
    bound = rank_width_heuristic(graph).width + 1
    if threads <= 1 or n < 6:
        width, edges = _branch_and_bound(graph, _Partial.seed(n), bound, floor)
    else:
        tasks = [(graph, p, bound, floor) for p in _frontier(n, min(n, 6))]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_search_task, tasks))
        found = [(w, i, e) for i, (w, e) in enumerate(results) if e is not None]
        width, _, edges = min(found, key=lambda t: (t[0], t[1]))
    assert edges is not None
    return WidthResult(width, SubcubicTree(n, tuple(edges)), True)


def greedy_tree(n: int, cost: Callable[[tuple[int, ...]], float]) -> SubcubicTree:
    """Bottom-up clustering into a subcubic tree.

    At every step the two clusters whose union has the smallest ``cost``
    are merged under a new inner vertex (ties: lexicographically smallest
    pair of sorted clusters). The last two clusters are joined by an edge.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    clusters: list[tuple[tuple[int, ...], int]] = [((v,), v) for v in range(n)]
    edges: list[tuple[int, int]] = []
    next_id = n
    while len(clusters) > 2:
        best_key = None
        best_pair = (0, 1)
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                a, b = clusters[i][0], clusters[j][0]
                pair = (a, b) if a < b else (b, a)
                key = (cost(tuple(sorted(a + b))), pair)
                if best_key is None or key < best_key:
                    best_key, best_pair = key, (i, j)
        i, j = best_pair
        (ca, ra), (cb, rb) = clusters[i], clusters[j]
        edges += [(next_id, ra), (next_id, rb)]
        merged = (tuple(sorted(ca + cb)), next_id)
        next_id += 1
        clusters = [c for k, c in enumerate(clusters) if k not in (i, j)] + [merged]
    edges.append((clusters[0][1], clusters[1][1]))
    return SubcubicTree(n, tuple(edges))


def rank_width_heuristic(graph: Graph) -> WidthResult:
    """Greedy upper bound on rank width (:func:`greedy_tree` with cut-rank as cost)."""
    if graph.n < 2:
        return WidthResult(0, None, False)
    tree = greedy_tree(graph.n, lambda cluster: cut_rank(graph, cluster))
    return WidthResult(width_of_tree(graph, tree), tree, False)


def minimize_over_trees(
    n: int, cost: Callable[[int], float], tol: float = 0.0
) -> tuple[float, SubcubicTree]:
    """Minimise ``max_e cost(leaf mask of e)`` over all subcubic trees on ``n`` leaves.

    ``cost`` must be symmetric under complementing the mask. Returns the first
    optimal tree in enumeration order; a later tree replaces it only when it
    is better by more than ``tol``.
    """
    full = (1 << n) - 1
    cache: dict[int, float] = {}

    def c(mask: int) -> float:
        key = min(mask, full ^ mask)
        val = cache.get(key)
        if val is None:
            val = cost(key)
            cache[key] = val
        return val

    best = math.inf
    best_tree: SubcubicTree | None = None
    for tree in enumerate_subcubic_trees(n):
        worst = -math.inf
        for mask in tree.edge_masks():
            worst = max(worst, c(mask))
            if worst >= best - tol:
                break
        else:
            if worst < best - tol:
                best, best_tree = worst, tree
    assert best_tree is not None
    return best, best_tree
