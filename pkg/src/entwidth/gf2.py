"""Binary linear algebra over GF(2).

Rows are packed into Python integers (bit ``j`` holds column ``j``), so a row
operation is a single XOR regardless of width.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "Gf2Matrix",
    "rank_f2",
    "cut_rank",
    "rank_of_rows",
    "row_reduce",
    "nullspace_f2",
    "in_span",
    "bits_to_int",
    "int_to_bits",
]


def bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for j, b in enumerate(bits):
        if int(b) & 1:
            value |= 1 << j
    return value


def int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> j) & 1 for j in range(width)]


@dataclass(frozen=True)
class Gf2Matrix:
    """Immutable binary matrix with bit-packed rows."""

    rows: int
    cols: int
    packed: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.packed) != self.rows:
            raise DomainError(f"expected {self.rows} packed rows, got {len(self.packed)}")
        limit = 1 << self.cols
        for r in self.packed:
            if r < 0 or r >= limit:
                raise DomainError("packed row has bits outside the column range")

    @classmethod
    def from_array(cls, array) -> Gf2Matrix:
        a = np.asarray(array)
        if a.ndim != 2:
            raise DomainError("Gf2Matrix needs a 2-d array")
        if a.size and not np.isin(a, (0, 1)).all():
            raise DomainError("entries must be exactly 0 or 1")
        packed = tuple(bits_to_int(row) for row in a.astype(np.uint8))
        return cls(a.shape[0], a.shape[1], packed)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Gf2Matrix:
        return cls(rows, cols, (0,) * rows)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.packed):
            out[i] = int_to_bits(r, self.cols)
        return out

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return (self.packed[i] >> j) & 1

    def transpose(self) -> Gf2Matrix:
        cols = [0] * self.cols
        for i, r in enumerate(self.packed):
            j = 0
            while r:
                if r & 1:
                    cols[j] |= 1 << i
                r >>= 1
                j += 1
        return Gf2Matrix(self.cols, self.rows, tuple(cols))

    @property
    def T(self) -> Gf2Matrix:
        return self.transpose()

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> Gf2Matrix:
        packed = []
        for i in row_idx:
            r = self.packed[i]
            packed.append(bits_to_int((r >> j) & 1 for j in col_idx))
        return Gf2Matrix(len(row_idx), len(col_idx), tuple(packed))


def rank_of_rows(rows: Iterable[int]) -> int:
    """Rank of a collection of packed rows (elimination on the leading bit)."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            pivot = basis.get(lead)
            if pivot is None:
                basis[lead] = r
                break
            r ^= pivot
    return len(basis)


def rank_f2(m: Gf2Matrix) -> int:
    """GF(2) rank of ``m``; 0 for matrices with no rows or no columns."""
    return rank_of_rows(m.packed)


def row_reduce(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form, pivoting on the lowest column index first.

    Returns the nonzero reduced rows and their pivot columns, both ordered by
    pivot column.
    """
    work = [r for r in rows]
    pivots: list[int] = []
    reduced: list[int] = []
    for col in range(ncols):
        bit = 1 << col
        pick = next((k for k, r in enumerate(work) if r & bit), None)
        if pick is None:
            continue
        prow = work.pop(pick)
        work = [r ^ prow if r & bit else r for r in work]
        reduced = [r ^ prow if r & bit else r for r in reduced]
        reduced.append(prow)
        pivots.append(col)
    return reduced, pivots


def nullspace_f2(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of ``{x : M x = 0}`` where ``M`` has the given packed rows.

    One basis vector per free column, in increasing column order.
    """
    reduced, pivots = row_reduce(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        x = 1 << free
        for r, p in zip(reduced, pivots):
            if (r >> free) & 1:
                x |= 1 << p
        basis.append(x)
    return basis


def in_span(vector: int, rows: Sequence[int]) -> bool:
    return rank_of_rows(list(rows) + [vector]) == rank_of_rows(rows)


def cut_rank(graph: Graph, subset: Iterable[int]) -> int:
    """GF(2) rank of the adjacency block between ``subset`` and its complement."""
    a = set(subset)
    n = graph.n
    bad = [v for v in a if not (0 <= v < n)]
    if bad:
        raise DomainError(f"vertices {sorted(bad)} are not in the graph (n={n})")
    mask_a = 0
    for v in a:
        mask_a |= 1 << v
    mask_b = ((1 << n) - 1) & ~mask_a
    return rank_of_rows(graph.row_masks[v] & mask_b for v in a)
