"""Dense statevector helpers.

Amplitude index convention: qubit 0 is the most significant bit, so index
``j`` of an ``m``-qubit vector is the big-endian bit string ``j_0 j_1 ... j_{m-1}``.
"""

from __future__ import annotations

import json
import os
from collections.abc import Sequence

import numpy as np

from .errors import DomainError, FormatError, SizeLimitError

__all__ = [
    "DEFAULT_DENSE_LIMIT",
    "RANK_RTOL",
    "check_dense_size",
    "canonicalize_phase",
    "num_qubits",
    "as_qubit_tensor",
    "bipartite_matrix",
    "schmidt_decomposition",
    "schmidt_rank_dense",
    "entanglement_entropy",
    "fidelity",
    "align_global_phase",
    "random_state",
    "random_unitary",
    "product_state",
    "read_statevector",
    "write_statevector",
    "statevector_to_json",
    "statevector_from_json",
]

DEFAULT_DENSE_LIMIT = 20
RANK_RTOL = 1e-10


def check_dense_size(m: int, limit: int = DEFAULT_DENSE_LIMIT) -> None:
    if m > limit:
        raise SizeLimitError(f"dense representation of {m} qubits exceeds the limit of {limit}")


def num_qubits(psi: np.ndarray) -> int:
    size = np.asarray(psi).size
    m = size.bit_length() - 1
    if size < 1 or (1 << m) != size:
        raise DomainError(f"statevector length {size} is not a power of two")
    return m


def canonicalize_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Multiply by a unit phase so the first non-negligible amplitude is real positive."""
    v = np.asarray(vec, dtype=complex)
    mags = np.abs(v)
    top = mags.max() if v.size else 0.0
    if top == 0.0:
        return v.copy()
    idx = int(np.argmax(mags > tol * top))
    return v * (abs(v[idx]) / v[idx])


def as_qubit_tensor(psi: np.ndarray) -> np.ndarray:
    m = num_qubits(psi)
    return np.asarray(psi, dtype=complex).reshape((2,) * m)


def bipartite_matrix(psi: np.ndarray, part: Sequence[int]) -> np.ndarray:
    """Matrix with rows indexed by ``part`` (in the given order) and columns by the rest."""
    t = as_qubit_tensor(psi)
    m = t.ndim
    part = list(part)
    rest = [q for q in range(m) if q not in set(part)]
    return t.transpose(part + rest).reshape(1 << len(part), 1 << len(rest))


def schmidt_decomposition(
    psi: np.ndarray, part: Sequence[int], rtol: float = RANK_RTOL
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt coefficients and vectors across ``(part, rest)``.

    Returns ``(s, left, right)`` with ``psi = sum_i s_i left[:, i] (x) right[:, i]``
    (``part`` qubits in the given order, the rest ascending). Singular values
    below ``rtol`` times the largest are dropped; each left vector is
    phase-canonicalised and the right vector carries the compensating phase.
    """
    mat = bipartite_matrix(psi, part)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    keep = s > rtol * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    u, s, vh = u[:, keep], s[keep], vh[keep]
    for i in range(u.shape[1]):
        col = u[:, i]
        mags = np.abs(col)
        idx = int(np.argmax(mags > 1e-12 * mags.max()))
        ph = mags[idx] / col[idx]
        u[:, i] = col * ph
        vh[i] = vh[i] / ph
    return s, u, vh.T


def schmidt_rank_dense(psi: np.ndarray, part: Sequence[int], rtol: float = RANK_RTOL) -> int:
    if len(part) == 0 or len(part) == num_qubits(psi):
        return 1
    s = np.linalg.svd(bipartite_matrix(psi, part), compute_uv=False)
    return int(np.count_nonzero(s > rtol * s[0])) if s[0] > 0 else 0


def entanglement_entropy(psi: np.ndarray, part: Sequence[int]) -> float:
    """Base-2 von Neumann entropy of the reduced state on ``part``."""
    if len(part) == 0 or len(part) == num_qubits(psi):
        return 0.0
    s = np.linalg.svd(bipartite_matrix(psi, part), compute_uv=False)
    p = s**2
    p = p[p > 1e-300] / p.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2 / (|a|^2 |b|^2)``."""
    a = np.ravel(a)
    b = np.ravel(b)
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def align_global_phase(vec: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rotate ``vec`` by the global phase that best matches ``reference``."""
    ov = np.vdot(vec, reference)
    if abs(ov) == 0:
        return np.asarray(vec, dtype=complex)
    return np.asarray(vec) * (ov / abs(ov))


def random_state(m: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(1 << m) + 1j * rng.standard_normal(1 << m)
    return v / np.linalg.norm(v)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d x d`` unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def product_state(single: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in single:
        out = np.kron(out, np.asarray(v, dtype=complex))
    return out


def statevector_to_json(psi: np.ndarray) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in np.ravel(psi)]


def statevector_from_json(data, path: str | None = None) -> np.ndarray:
    if isinstance(data, dict):
        data = data.get("amplitudes")
    if not isinstance(data, list) or not data:
        raise FormatError("statevector must be a non-empty list of [re, im] pairs", None, path)
    out = np.empty(len(data), dtype=complex)
    for i, pair in enumerate(data):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise FormatError(f"amplitude {i} is not a [re, im] pair", None, path)
        try:
            out[i] = complex(float(pair[0]), float(pair[1]))
        except (TypeError, ValueError):
            raise FormatError(f"amplitude {i} is not numeric", None, path) from None
    num_qubits(out)
    return out


def read_statevector(path: str | os.PathLike) -> np.ndarray:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, str(path)) from None
    return statevector_from_json(data, str(path))


def write_statevector(psi: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(statevector_to_json(psi), fh)
        fh.write("\n")
