"""Symplectic Pauli operators and graph-state stabilizer machinery.

A :class:`PauliOperator` on ``n`` qubits is ``i**phase * X^x Z^z`` where
``x`` and ``z`` are bitmasks (bit ``q`` is qubit ``q``) and the qubit-wise
product is ordered X before Z. With this form the product rule is exact:
``(i^a X^x1 Z^z1)(i^b X^x2 Z^z2) = i^(a+b+2|z1&x2|) X^(x1^x2) Z^(z1^z2)``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .dense import DEFAULT_DENSE_LIMIT, canonicalize_phase, check_dense_size
from .errors import DomainError
from .gf2 import nullspace_f2, rank_of_rows, row_reduce
from .graph import Graph

__all__ = [
    "PauliOperator",
    "StabilizerGroup",
    "graph_state_stabilizer",
    "restricted_subgroup",
    "schmidt_rank",
    "schmidt_coefficient",
    "schmidt_vectors",
    "schmidt_basis_dense",
    "stabilizer_state_to_dense",
    "graph_state_amplitude",
    "graph_state_dense",
    "overlap_dense",
    "quadratic_form",
]


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", self.phase % 4)
        if (self.x | self.z) >> self.n:
            raise DomainError("Pauli bits outside the qubit range")

    @classmethod
    def from_label(cls, label: str) -> PauliOperator:
        """Parse labels such as ``"XZI"``, ``"-YY"`` or ``"+iZ"``; character ``q`` is qubit ``q``."""
        sign = 0
        body = label
        for prefix, p in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if body.startswith(prefix):
                sign = p
                body = body[len(prefix):]
                break
        x = z = 0
        ys = 0
        for q, ch in enumerate(body):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch == "Y":
                ys += 1
            if ch not in "IXYZ":
                raise DomainError(f"bad Pauli letter {ch!r}")
        return cls(len(body), x, z, sign + ys)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n, 0, 0, 0)

    @classmethod
    def hermitian(cls, n: int, x: int, z: int, negative: bool = False) -> PauliOperator:
        """The Hermitian operator ``+-`` (product of single-qubit X, Y, Z) with these bits."""
        return cls(n, x, z, _popcount(x & z) + (2 if negative else 0))

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def coefficient(self) -> complex:
        """The scalar in front of the tensor product of X, Y, Z letters."""
        return (1, 1j, -1, -1j)[(self.phase - _popcount(self.x & self.z)) % 4]

    @property
    def support(self) -> frozenset[int]:
        s = self.x | self.z
        return frozenset(q for q in range(self.n) if (s >> q) & 1)

    def label(self) -> str:
        letters = "".join(
            "IXZY"[((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)] for q in range(self.n)
        )
        prefix = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.coefficient]
        return prefix + letters

    def __repr__(self) -> str:
        return f"PauliOperator({self.label()!r})"

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        if other.n != self.n:
            raise DomainError("qubit counts differ")
        phase = self.phase + other.phase + 2 * _popcount(self.z & other.x)
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    def __neg__(self) -> PauliOperator:
        return PauliOperator(self.n, self.x, self.z, self.phase + 2)

    def commutes(self, other: PauliOperator) -> bool:
        return _popcount((self.x & other.z) ^ (self.z & other.x)) % 2 == 0

    def is_hermitian(self) -> bool:
        return (self.phase - _popcount(self.x & self.z)) % 2 == 0

    def is_identity_up_to_phase(self) -> bool:
        return self.x == 0 and self.z == 0

    def restrict(self, qubits: Sequence[int]) -> PauliOperator:
        """The same operator on the listed qubits only; it must act trivially elsewhere."""
        keep = 0
        for q in qubits:
            keep |= 1 << q
        if (self.x | self.z) & ~keep:
            raise DomainError("operator acts non-trivially outside the kept qubits")
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << i
            z |= ((self.z >> q) & 1) << i
        return PauliOperator(len(qubits), x, z, self.phase)

    def symplectic(self) -> int:
        """Bits ``2q`` = z_q and ``2q + 1`` = x_q; pivoting on low bits prefers Z on low qubits."""
        out = 0
        for q in range(self.n):
            out |= ((self.z >> q) & 1) << (2 * q)
            out |= ((self.x >> q) & 1) << (2 * q + 1)
        return out

    @classmethod
    def from_symplectic(cls, n: int, vec: int) -> PauliOperator:
        x = z = 0
        for q in range(n):
            z |= ((vec >> (2 * q)) & 1) << q
            x |= ((vec >> (2 * q + 1)) & 1) << q
        return cls.hermitian(n, x, z)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Dense action on an ``n``-qubit statevector (qubit 0 most significant)."""
        n = self.n
        idx = np.arange(1 << n, dtype=np.int64)
        xm = _big_endian_mask(self.x, n)
        zm = _big_endian_mask(self.z, n)
        sign = 1 - 2 * (np.bitwise_count(idx & zm) & 1).astype(np.int8)
        w = sign * np.asarray(vec, dtype=complex)
        return (1j**self.phase) * w[idx ^ xm]

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n
        return np.stack([self.apply(col) for col in np.eye(dim, dtype=complex)], axis=1)


def _big_endian_mask(bits: int, n: int) -> int:
    out = 0
    for q in range(n):
        if (bits >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def _product(ops: Sequence[PauliOperator], exponents: int, n: int) -> PauliOperator:
    out = PauliOperator.identity(n)
    for i, g in enumerate(ops):
        if (exponents >> i) & 1:
            out = out * g
    return out


@dataclass(frozen=True)
class StabilizerGroup:
    """Group generated by independent, commuting Hermitian Pauli operators."""

    generators: tuple[PauliOperator, ...]
    n: int

    def __init__(self, generators: Iterable[PauliOperator], n: int | None = None):
        gens = tuple(generators)
        if n is None:
            if not gens:
                raise DomainError("qubit count needed for an empty generator list")
            n = gens[0].n
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "n", n)
        self._validate()

    def _validate(self) -> None:
        gens = self.generators
        for g in gens:
            if g.n != self.n:
                raise DomainError("generators act on different qubit counts")
            if not g.is_hermitian():
                raise DomainError(f"generator {g.label()} is not Hermitian")
        for i, g in enumerate(gens):
            for h in gens[i + 1:]:
                if not g.commutes(h):
                    raise DomainError(f"generators {g.label()} and {h.label()} anticommute")
        vecs = [g.symplectic() for g in gens]
        if rank_of_rows(vecs) < len(gens):
            # dependent: some product of generators is proportional to identity
            cols = _columns(vecs, len(gens), 2 * self.n)
            for combo in nullspace_f2(cols, len(gens)):
                prod = _product(gens, combo, self.n)
                if prod.phase != 0:
                    raise DomainError("generators are inconsistent: -I is in the group")
            raise DomainError("generators are not independent")

    def __len__(self) -> int:
        return len(self.generators)

    def labels(self) -> list[str]:
        return [g.label() for g in self.generators]

    def elements(self) -> list[PauliOperator]:
        return [_product(self.generators, e, self.n) for e in range(1 << len(self.generators))]


def _columns(vecs: Sequence[int], nvec: int, width: int) -> list[int]:
    """Transpose packed vectors: row ``b`` has bit ``i`` set iff ``vecs[i]`` has bit ``b``."""
    rows = []
    for b in range(width):
        r = 0
        for i in range(nvec):
            if (vecs[i] >> b) & 1:
                r |= 1 << i
        rows.append(r)
    return rows


def graph_state_stabilizer(graph: Graph) -> StabilizerGroup:
    """Generators ``K_a = X_a prod_{b in N(a)} Z_b`` with phase +1."""
    n = graph.n
    gens = [PauliOperator(n, 1 << a, graph.row_masks[a], 0) for a in range(n)]
    return StabilizerGroup(gens, n)


def _check_part(n: int, part: Iterable[int], proper: bool = False) -> list[int]:
    a = sorted(set(int(q) for q in part))
    if any(q < 0 or q >= n for q in a):
        raise DomainError(f"qubits {a} not all in 0..{n - 1}")
    if proper and (len(a) == 0 or len(a) == n):
        raise DomainError("the subset must be non-empty and proper")
    return a


def restricted_subgroup(group: StabilizerGroup, part: Iterable[int]) -> list[PauliOperator]:
    """Independent generators of the elements supported inside ``part``.

    The exponent vectors ``x`` with ``prod K_a^{x_a}`` trivial outside
    ``part`` form the GF(2) null space of the outside rows of the generator
    matrix. Returned operators act on ``len(part)`` qubits, in sorted order of
    ``part``.
    """
    n = group.n
    a = _check_part(n, part)
    outside = [q for q in range(n) if q not in set(a)]
    gens = group.generators
    rows = []
    for q in outside:
        rows.append(sum(((g.x >> q) & 1) << i for i, g in enumerate(gens)))
        rows.append(sum(((g.z >> q) & 1) << i for i, g in enumerate(gens)))
    return [_product(gens, combo, n).restrict(a) for combo in nullspace_f2(rows, len(gens))]


def schmidt_rank(graph: Graph, part: Iterable[int]) -> int:
    """Schmidt rank ``2^|A| / |S_A|`` of the graph state across ``(part, rest)``."""
    a = _check_part(graph.n, part, proper=True)
    s = len(restricted_subgroup(graph_state_stabilizer(graph), a))
    return 1 << (len(a) - s)


def schmidt_coefficient(graph: Graph, part: Iterable[int]) -> float:
    """The single (repeated) Schmidt coefficient ``sqrt(1/r)``."""
    return float(np.sqrt(1.0 / schmidt_rank(graph, part)))


def _complete_isotropic(m: int, vecs: list[int]) -> list[int]:
    """Extend an isotropic set of symplectic vectors to ``m`` independent commuting ones.

    Each step adds the first basis vector of the symplectic complement (in
    reduced echelon order over bits ``z_0, x_0, z_1, x_1, ...``) that is not
    already spanned.
    """
    current = list(vecs)
    added = []
    while len(current) < m:
        # <v, c> = sum_q v.x_q c.z_q + v.z_q c.x_q, i.e. v . swap(c)
        constraints = [_swap_zx(c, m) for c in current]
        for cand in nullspace_f2(constraints, 2 * m):
            if rank_of_rows(current + [cand]) > len(current):
                current.append(cand)
                added.append(cand)
                break
        else:  # pragma: no cover - impossible for isotropic input
            raise AssertionError("symplectic complement exhausted")
    return added


def _swap_zx(vec: int, m: int) -> int:
    out = 0
    for q in range(m):
        out |= ((vec >> (2 * q + 1)) & 1) << (2 * q)
        out |= ((vec >> (2 * q)) & 1) << (2 * q + 1)
    return out


def schmidt_vectors(graph: Graph, part: Iterable[int]) -> list[StabilizerGroup]:
    """Stabilizer descriptions of an orthonormal Schmidt basis on ``part``.

    The generators of ``S_A`` are completed to ``|A|`` commuting independent
    operators; flipping the signs of the added ones gives ``2^(|A|-s)``
    mutually orthogonal eigenvectors of the reduced state. Entry ``alpha`` has
    sign bit ``k`` (most significant first) on the ``k``-th added operator.
    """
    a = _check_part(graph.n, part, proper=True)
    m = len(a)
    sub = restricted_subgroup(graph_state_stabilizer(graph), a)
    extra = [PauliOperator.from_symplectic(m, v) for v in _complete_isotropic(m, [g.symplectic() for g in sub])]
    k = len(extra)
    out = []
    for alpha in range(1 << k):
        signed = [-g if (alpha >> (k - 1 - i)) & 1 else g for i, g in enumerate(extra)]
        out.append(StabilizerGroup(sub + signed, m))
    return out


def stabilizer_state_to_dense(
    group: StabilizerGroup | Sequence[PauliOperator], limit: int = DEFAULT_DENSE_LIMIT
) -> np.ndarray:
    """Unit vector fixed by every generator, first non-zero amplitude real positive.

    A computational basis state inside the support is found from the Z-type
    subgroup; the projector ``prod (I + g) / 2`` is then applied to it.
    """
    if not isinstance(group, StabilizerGroup):
        group = StabilizerGroup(group)
    m = group.n
    check_dense_size(m, limit)
    if len(group) != m:
        raise DomainError(f"{len(group)} generators on {m} qubits do not fix a unique state")
    # eliminate X parts to expose the Z-type subgroup
    work = list(group.generators)
    ztype: list[PauliOperator] = []
    for q in range(m):
        pick = next((i for i, g in enumerate(work) if (g.x >> q) & 1), None)
        if pick is None:
            continue
        pivot = work.pop(pick)
        work = [g * pivot if (g.x >> q) & 1 else g for g in work]
    ztype = work
    # amplitude on |j> non-zero iff (-1)^{z.j} * sign = +1 for each Z-type element
    rows = []
    for g in ztype:
        rhs = 0 if g.phase == 0 else 1
        rows.append(g.z | (rhs << m))
    reduced, pivots = row_reduce(rows, m + 1)
    if m in pivots:
        raise DomainError("generators are inconsistent: -I is in the group")
    j_bits = 0
    for r, p in zip(reduced, pivots):
        if (r >> m) & 1:
            j_bits |= 1 << p
    vec = np.zeros(1 << m, dtype=complex)
    vec[_big_endian_mask(j_bits, m)] = 1.0
    for g in group.generators:
        vec = 0.5 * (vec + g.apply(vec))
    norm = np.linalg.norm(vec)
    if norm < 1e-12:  # pragma: no cover - guarded by the support computation
        raise DomainError("projector annihilated the seed basis state")
    return canonicalize_phase(vec / norm)


def quadratic_form(graph: Graph, bits: Sequence[int]) -> int:
    """``q_G(u) = sum_{a<b} Gamma_ab u_a u_b mod 2``: edges inside the support of ``u``."""
    mask = 0
    for q, b in enumerate(bits):
        if int(b):
            mask |= 1 << q
    return sum(_popcount(graph.row_masks[a] & mask) for a in range(graph.n) if (mask >> a) & 1) // 2 % 2


def _bits(u: str | Sequence[int], n: int) -> list[int]:
    if isinstance(u, str):
        bits = [int(c) for c in u]
    else:
        bits = [int(b) for b in u]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise DomainError(f"expected a {n}-bit string")
    return bits


def graph_state_amplitude(graph: Graph, u: str | Sequence[int]) -> complex:
    """``<u|G> = 2^{-n/2} (-1)^{q_G(u)}``; character ``q`` of ``u`` is qubit ``q``."""
    bits = _bits(u, graph.n)
    return complex(2.0 ** (-graph.n / 2) * (-1) ** quadratic_form(graph, bits))


def graph_state_dense(graph: Graph, limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    """All ``2^n`` amplitudes of ``|G>`` from the quadratic-form expansion."""
    n = graph.n
    check_dense_size(n, limit)
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
    parity = np.zeros(1 << n, dtype=np.int64)
    for a, b in graph.edges():
        parity ^= bits[a] & bits[b]
    return (1 - 2 * parity) * 2.0 ** (-n / 2) + 0j


def overlap_dense(a: StabilizerGroup, b: StabilizerGroup, limit: int = DEFAULT_DENSE_LIMIT) -> complex:
    """``<a|b>`` between the canonical dense vectors of two stabilizer states."""
    if a.n != b.n:
        raise DomainError("stabilizer states act on different qubit counts")
    return complex(np.vdot(stabilizer_state_to_dense(a, limit), stabilizer_state_to_dense(b, limit)))


def schmidt_basis_dense(graph: Graph, part: Iterable[int], limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    """Columns are the dense Schmidt vectors from :func:`schmidt_vectors` (qubits of ``part`` sorted)."""
    a = _check_part(graph.n, part, proper=True)
    check_dense_size(len(a), limit)
    return np.stack([stabilizer_state_to_dense(s, limit) for s in schmidt_vectors(graph, a)], axis=1)
