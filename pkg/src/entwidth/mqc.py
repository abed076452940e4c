"""Adaptive single-qubit measurement sequences on tree tensor networks.

Outcome bit 0 is the +1 eigenvalue, bit 1 the -1 eigenvalue. An equatorial
basis with angle ``phi`` measures ``cos(phi) X + sin(phi) Y``; ``X`` and ``Y``
are the angles 0 and pi/2. A step's ``adapt`` list names earlier steps whose
outcome parity, when odd, flips the sign of its angle. Z measurements ignore
``adapt``.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .dense import DEFAULT_DENSE_LIMIT, as_qubit_tensor, check_dense_size, num_qubits
from .errors import DomainError, FormatError, ImpossibleBranchError
from .ttn import TreeTensorNetwork

__all__ = [
    "MeasurementStep",
    "MeasurementProgram",
    "SimulationRecord",
    "IMPOSSIBLE_BRANCH_TOL",
    "basis_vectors",
    "apply_local_unitary",
    "outcome_probabilities",
    "measure_step",
    "run_program",
    "oracle_run",
    "shot_rng",
    "read_program",
    "write_program",
]

IMPOSSIBLE_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementStep:
    qubit: int
    basis: str | float
    adapt: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubit", int(self.qubit))
        object.__setattr__(self, "adapt", tuple(int(a) for a in self.adapt))
        if isinstance(self.basis, str):
            if self.basis not in ("X", "Y", "Z"):
                raise DomainError(f"basis must be X, Y, Z or an angle, got {self.basis!r}")
        else:
            object.__setattr__(self, "basis", float(self.basis))

    def resolved_angle(self, outcomes: Sequence[int]) -> float | None:
        """Equatorial angle after feed-forward, or None for a Z measurement."""
        if self.basis == "Z":
            return None
        phi = {"X": 0.0, "Y": np.pi / 2}.get(self.basis, self.basis)
        parity = sum(outcomes[i] for i in self.adapt) % 2
        return -phi if parity else phi

    def to_json(self) -> dict:
        basis = self.basis if isinstance(self.basis, str) else {"angle": self.basis}
        return {"qubit": self.qubit, "basis": basis, "adapt": list(self.adapt)}


@dataclass(frozen=True)
class MeasurementProgram:
    steps: tuple[MeasurementStep, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        seen = set()
        for i, s in enumerate(self.steps):
            if s.qubit in seen:
                raise DomainError(f"step {i}: qubit {s.qubit} is measured twice")
            seen.add(s.qubit)
            for a in s.adapt:
                if not 0 <= a < i:
                    raise DomainError(f"step {i}: adapt index {a} does not refer to an earlier step")

    def __len__(self) -> int:
        return len(self.steps)

    def check_qubits(self, n: int) -> None:
        for i, s in enumerate(self.steps):
            if not 0 <= s.qubit < n:
                raise DomainError(f"step {i}: qubit {s.qubit} is outside 0..{n - 1}")

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, data: Mapping, path: str | None = None) -> MeasurementProgram:
        if not isinstance(data, Mapping) or not isinstance(data.get("steps"), list):
            raise FormatError("program must be an object with a 'steps' list", None, path)
        steps = []
        for i, raw in enumerate(data["steps"]):
            try:
                basis = raw["basis"]
                if isinstance(basis, Mapping):
                    basis = float(basis["angle"])
                elif not isinstance(basis, str):
                    raise TypeError("basis must be a string or {'angle': radians}")
                qubit = raw["qubit"]
                if isinstance(qubit, bool) or not isinstance(qubit, int):
                    raise TypeError("qubit must be an integer")
                steps.append(MeasurementStep(qubit, basis, tuple(raw.get("adapt", ()))))
            except (KeyError, TypeError, ValueError, DomainError) as exc:
                raise FormatError(f"step {i}: {exc}", None, path) from None
        try:
            return cls(tuple(steps))
        except DomainError as exc:
            raise FormatError(str(exc), None, path) from None


def read_program(path: str | os.PathLike) -> MeasurementProgram:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, str(path)) from None
    return MeasurementProgram.from_json(data, str(path))


def write_program(program: MeasurementProgram, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(program.to_json(), fh, indent=1)
        fh.write("\n")


def basis_vectors(angle: float | None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors for outcome 0 (+1) and outcome 1 (-1)."""
    if angle is None:
        return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    ph = np.exp(1j * angle)
    s = 1 / np.sqrt(2)
    return np.array([s, s * ph]), np.array([s, -s * ph])


@dataclass
class SimulationRecord:
    """One shot. ``final_state`` is a network for the TTN path and a dense vector for the oracle."""

    outcomes: list[int] = field(default_factory=list)
    probabilities: list[float] = field(default_factory=list)
    angles: list[float | None] = field(default_factory=list)
    final_state: TreeTensorNetwork | np.ndarray | None = None
    seed: int | None = None
    shot: int = 0

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.outcomes)

    @property
    def joint_probability(self) -> float:
        return float(np.prod(self.probabilities)) if self.probabilities else 1.0

    def to_json(self) -> dict:
        return {
            "shot": self.shot,
            "seed": self.seed,
            "outcomes": self.bitstring,
            "probabilities": [float(p) for p in self.probabilities],
        }


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Generator for one shot, derived from ``(seed, shot)``."""
    return np.random.default_rng([int(seed), int(shot)])


def apply_local_unitary(ttn: TreeTensorNetwork, qubit: int, unitary: np.ndarray, atol: float = 1e-9) -> TreeTensorNetwork:
    """Absorb a single-qubit unitary into the open index of ``qubit``; bonds are untouched."""
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=atol):
        raise DomainError("expected a 2x2 unitary")
    if ttn.leaf_dim(qubit) != 2:
        raise DomainError(f"qubit {qubit} has already been measured")
    v, ax = ttn.leaf_slot(qubit)
    t = np.moveaxis(np.tensordot(u, ttn.tensors[v], axes=([1], [ax])), 0, ax)
    return ttn.with_tensor(v, t)


def _env(ttn: TreeTensorNetwork, w: int, parent: int) -> np.ndarray:
    """``E[a, a'] = sum conj(S[a, ...]) S[a', ...]`` for the branch ``S`` below ``w``."""
    tree = ttn.tree
    if tree.is_leaf(w):
        return np.eye(ttn.leaf_dim(w), dtype=complex)
    nbrs = tree.neighbors(w)
    p = nbrs.index(parent)
    c = [i for i in range(3) if i != p]
    t = ttn.tensors[w].transpose(c[0], c[1], p)
    e1 = _env(ttn, nbrs[c[0]], w)
    e2 = _env(ttn, nbrs[c[1]], w)
    # ket side: contract children envs, then close against the bra
    x = np.tensordot(e1, t, axes=([1], [0]))
    x = np.tensordot(e2, x, axes=([1], [1]))  # (b, a, p)
    return np.tensordot(t.conj(), x, axes=([0, 1], [1, 0]))


def _leaf_moment(ttn: TreeTensorNetwork, qubit: int) -> np.ndarray:
    """``M[x, x'] = sum_rest conj(psi[x, rest]) psi[x', rest]`` for the open index of ``qubit``."""
    v, ax = ttn.leaf_slot(qubit)
    t = ttn.tensors[v]
    if ttn.n == 2:
        t = np.moveaxis(t, ax, 0)
        e = np.eye(t.shape[1], dtype=complex)
        return t.conj() @ e @ t.T
    nbrs = ttn.tree.neighbors(v)
    others = [i for i in range(3) if i != ax]
    t = t.transpose(ax, others[0], others[1])
    e1 = _env(ttn, nbrs[others[0]], v)
    e2 = _env(ttn, nbrs[others[1]], v)
    x = np.tensordot(t, e1, axes=([1], [1]))  # (x', b', a)
    x = np.tensordot(x, e2, axes=([1], [1]))  # (x', a, b)
    return np.tensordot(t.conj(), x, axes=([1, 2], [1, 2]))


def outcome_probabilities(ttn: TreeTensorNetwork, qubit: int, angle: float | None) -> tuple[float, float]:
    """Unnormalised weights ``<psi|P_b|psi>`` for both outcomes, one tree contraction."""
    if ttn.leaf_dim(qubit) != 2:
        raise DomainError(f"qubit {qubit} has already been measured")
    m = _leaf_moment(ttn, qubit)
    v0, v1 = basis_vectors(angle)
    p0 = float(np.real(v0 @ m @ v0.conj()))
    p1 = float(np.real(v1 @ m @ v1.conj()))
    return max(p0, 0.0), max(p1, 0.0)


def measure_step(
    ttn: TreeTensorNetwork,
    step: MeasurementStep,
    outcomes: Sequence[int],
    index: int | None = None,
    rng: np.random.Generator | None = None,
    forced: int | None = None,
) -> tuple[TreeTensorNetwork, int, float, float | None]:
    """Perform one measurement; returns ``(network, outcome, probability, angle)``.

    The projector's bra is absorbed into the qubit's open index, leaving a
    dimension-1 index, and the adjacent tensor is rescaled so the remaining
    state has unit norm.
    """
    index = len(outcomes) if index is None else index
    if any(a >= len(outcomes) for a in step.adapt):
        raise DomainError(f"step {index}: adapt refers to an outcome that is not available yet")
    angle = step.resolved_angle(outcomes)
    w0, w1 = outcome_probabilities(ttn, step.qubit, angle)
    total = w0 + w1
    if forced is None:
        if rng is None:
            raise DomainError("either a random generator or a forced outcome is required")
        outcome = 0 if rng.random() < w0 / total else 1
    else:
        outcome = int(forced)
        if outcome not in (0, 1):
            raise DomainError(f"forced outcome must be 0 or 1, got {forced!r}")
    weight = (w0, w1)[outcome]
    prob = weight / total
    if prob < IMPOSSIBLE_BRANCH_TOL:
        raise ImpossibleBranchError(index, outcome, prob)
    bra = basis_vectors(angle)[outcome].conj()
    v, ax = ttn.leaf_slot(step.qubit)
    t = np.tensordot(bra, ttn.tensors[v], axes=([0], [ax]))
    t = np.expand_dims(t, ax) / np.sqrt(weight)
    return ttn.with_tensor(v, t), outcome, prob, angle


def run_program(
    ttn: TreeTensorNetwork,
    program: MeasurementProgram,
    seed: int = 0,
    shots: int = 1,
    forced: Sequence[int] | None = None,
) -> list[SimulationRecord]:
    """Execute ``program`` once per shot; shot ``k`` samples from ``shot_rng(seed, k)``."""
    program.check_qubits(ttn.n)
    if forced is not None and len(forced) != len(program):
        raise DomainError("need one forced outcome per step")
    records = []
    for shot in range(shots):
        rng = shot_rng(seed, shot)
        rec = SimulationRecord(final_state=ttn, seed=seed, shot=shot)
        state = ttn
        for i, step in enumerate(program.steps):
            f = None if forced is None else forced[i]
            state, outcome, prob, angle = measure_step(state, step, rec.outcomes, i, rng, f)
            rec.outcomes.append(outcome)
            rec.probabilities.append(prob)
            rec.angles.append(angle)
        rec.final_state = state
        records.append(rec)
    return records


def oracle_run(
    psi: np.ndarray,
    program: MeasurementProgram,
    seed: int = 0,
    shot: int = 0,
    forced: Sequence[int] | None = None,
    limit: int = DEFAULT_DENSE_LIMIT,
) -> SimulationRecord:
    """Dense reference: project the full statevector step by step.

    ``final_state`` is the normalised vector on the unmeasured qubits in
    label order.
    """
    n = num_qubits(psi)
    check_dense_size(n, limit)
    program.check_qubits(n)
    if forced is not None and len(forced) != len(program):
        raise DomainError("need one forced outcome per step")
    t = as_qubit_tensor(psi)
    t = t / np.linalg.norm(t)
    live = list(range(n))
    rng = shot_rng(seed, shot)
    rec = SimulationRecord(seed=seed, shot=shot)
    for i, step in enumerate(program.steps):
        angle = step.resolved_angle(rec.outcomes)
        ax = live.index(step.qubit)
        branches = [np.tensordot(b.conj(), t, axes=([0], [ax])) for b in basis_vectors(angle)]
        weights = [float(np.vdot(b, b).real) for b in branches]
        total = sum(weights)
        if forced is None:
            outcome = 0 if rng.random() < weights[0] / total else 1
        else:
            outcome = int(forced[i])
        prob = weights[outcome] / total
        if prob < IMPOSSIBLE_BRANCH_TOL:
            raise ImpossibleBranchError(i, outcome, prob)
        t = branches[outcome] / np.sqrt(weights[outcome])
        live.pop(ax)
        rec.outcomes.append(outcome)
        rec.probabilities.append(prob)
        rec.angles.append(angle)
    rec.final_state = np.asarray(t).reshape(-1)
    return rec
