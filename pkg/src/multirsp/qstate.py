"""Finite-dimensional qubit state algebra.

Qubit 0 is the leftmost symbol of a ket, so ``|HHVV>`` has amplitude index
``0b0011``. Bit 0 stands for H (or psi) and bit 1 for V (or psi-bar).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

ATOL = 1e-12
NULL_PROBABILITY = 1e-15


class NullOutcomeError(ValueError):
    """Raised when a conditioning event has (numerically) zero probability."""

    def __init__(self, probability: float, message: str = "null outcome"):
        super().__init__(f"{message} (probability={probability:.3e})")
        self.probability = probability


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized ket on ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if n < 1 or amps.size != 2**n:
            raise ValueError(f"amplitude count {amps.size} is not 2**n with n >= 1")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm^2={norm!r})")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def from_vector(cls, vec) -> "PureState":
        """Normalize an arbitrary nonzero vector."""
        vec = np.asarray(vec, dtype=complex).ravel()
        norm = np.linalg.norm(vec)
        if norm < NULL_PROBABILITY:
            raise NullOutcomeError(float(norm**2), "cannot normalize a zero vector")
        return cls(vec / norm)

    @classmethod
    def from_label(cls, label: str) -> "PureState":
        """Product state from a string over ``H V D A L R`` (also ``0 1 + -``)."""
        vec = np.array([1.0 + 0j])
        for ch in label:
            vec = np.kron(vec, polarization(ch))
        return cls(vec)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.amplitudes.size))

    def amplitude(self, bits: str) -> complex:
        """Amplitude of a basis ket given as a bit string or H/V string."""
        bits = bits.replace("H", "0").replace("V", "1")
        return complex(self.amplitudes[int(bits, 2)])

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on qubits."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(np.log2(rho.shape[0])))
        if n < 1 or rho.shape[0] != 2**n:
            raise ValueError(f"dimension {rho.shape[0]} is not 2**n with n >= 1")
        if np.max(np.abs(rho - rho.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > ATOL:
            raise ValueError(f"trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _readonly(rho))

    @classmethod
    def from_operator(cls, op) -> "DensityMatrix":
        """Hermitize and trace-normalize a positive operator."""
        op = np.asarray(op, dtype=complex)
        tr = np.trace(op).real
        if tr < NULL_PROBABILITY:
            raise NullOutcomeError(float(tr), "cannot normalize a zero operator")
        op = 0.5 * (op + op.conj().T) / tr
        return cls(op)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.entries.shape[0]))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def expectation(self, state: PureState) -> float:
        v = state.amplitudes
        return float(np.vdot(v, self.entries @ v).real)


_POLARIZATIONS = {
    "H": (1, 0),
    "V": (0, 1),
    "D": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "A": (1 / np.sqrt(2), -1 / np.sqrt(2)),
    "L": (1 / np.sqrt(2), 1j / np.sqrt(2)),
    "R": (1 / np.sqrt(2), -1j / np.sqrt(2)),
}
_POLARIZATIONS.update({"0": _POLARIZATIONS["H"], "1": _POLARIZATIONS["V"],
                       "+": _POLARIZATIONS["D"], "-": _POLARIZATIONS["A"]})


def polarization(label: str) -> np.ndarray:
    """Single-qubit Jones vector for one of ``H V D A L R``."""
    try:
        return np.array(_POLARIZATIONS[label], dtype=complex)
    except KeyError:
        raise ValueError(f"unknown polarization label {label!r}") from None


def qubit(label_or_vec) -> PureState:
    """Coerce a label like ``"D"`` or a length-2 vector into a one-qubit state."""
    if isinstance(label_or_vec, PureState):
        return label_or_vec
    if isinstance(label_or_vec, str):
        return PureState(polarization(label_or_vec))
    return PureState.from_vector(label_or_vec)


def orthogonal(state: PureState) -> PureState:
    """The single-qubit state orthogonal to ``state`` (fixed phase convention)."""
    a, b = state.amplitudes
    return PureState(np.array([-np.conj(b), np.conj(a)]))


@dataclass(frozen=True)
class ProductProjector:
    """Local rank-one projections, one single-qubit state per measured qubit."""

    targets: tuple

    def __post_init__(self):
        targets = tuple((int(i), qubit(s)) for i, s in self.targets)
        idx = [i for i, _ in targets]
        if len(set(idx)) != len(idx):
            raise ValueError(f"projector indices are not distinct: {idx}")
        for _, s in targets:
            if s.n_qubits != 1:
                raise ValueError("projector targets must be single-qubit states")
        object.__setattr__(self, "targets", targets)

    @property
    def indices(self) -> tuple:
        return tuple(i for i, _ in self.targets)


def tensor_product(a: PureState, b: PureState) -> PureState:
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def tensor_all(states: Iterable[PureState]) -> PureState:
    vec = np.array([1.0 + 0j])
    for s in states:
        vec = np.kron(vec, s.amplitudes)
    return PureState(vec)


def is_unitary(u, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol
    )


def check_unitary(u, special: bool = False) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary")
    if special and abs(np.linalg.det(u) - 1) > ATOL:
        raise ValueError("matrix is not special unitary (det != 1)")
    return u


def _apply_local(vec: np.ndarray, n: int, u: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    psi = vec.reshape((2,) * n)
    for q in qubits:
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def apply_product_unitary(s: PureState, u) -> PureState:
    """Return ``u^{(x)n} |s>``."""
    u = check_unitary(u)
    return PureState(_apply_local(s.amplitudes, s.n_qubits, u, range(s.n_qubits)))


def apply_local_unitary(s: PureState, u, qubits: Sequence[int]) -> PureState:
    u = check_unitary(u)
    return PureState(_apply_local(s.amplitudes, s.n_qubits, u, qubits))


def conjugate_density(rho: DensityMatrix, u) -> DensityMatrix:
    """``u^{(x)n} rho u^{dagger (x)n}``."""
    u = check_unitary(u)
    full = np.array([[1.0 + 0j]])
    for _ in range(rho.n_qubits):
        full = np.kron(full, u)
    return DensityMatrix.from_operator(full @ rho.entries @ full.conj().T)


def project_subsystem(s: PureState, p: ProductProjector):
    """Project qubits of ``s`` onto the product state described by ``p``.

    Returns
    -------
    probability : float
        Squared norm of the projected component.
    conditional : PureState or None
        Normalized state of the unmeasured qubits, ordered as in ``s``.
        ``None`` when every qubit was measured.

    Raises
    ------
    NullOutcomeError
        If the outcome probability is below ``1e-15``.
    """
    n = s.n_qubits
    for i in p.indices:
        if not 0 <= i < n:
            raise ValueError(f"projector index {i} out of range for {n} qubits")
    psi = s.amplitudes.reshape((2,) * n)
    # contract highest index first so remaining axis numbers stay valid
    for i, target in sorted(p.targets, key=lambda t: -t[0]):
        psi = np.tensordot(target.amplitudes.conj(), psi, axes=([0], [i]))
    rest = np.asarray(psi).reshape(-1)
    prob = float(np.vdot(rest, rest).real)
    if prob < NULL_PROBABILITY:
        raise NullOutcomeError(prob)
    if len(p.indices) == n:
        return prob, None
    return prob, PureState(rest / np.sqrt(prob))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduce ``rho`` to the qubits in ``keep`` (output in ascending qubit order)."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    n = rho.n_qubits
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} qubits")
    if len(keep) == n:
        return rho
    traced = [q for q in range(n) if q not in keep]
    t = rho.entries.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for q in traced:
        col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 2 ** len(keep)
    return DensityMatrix.from_operator(reduced.reshape(d, d))


def fidelity(state, target: PureState) -> float:
    """``<target|rho|target>``; for a pure ``state`` this is ``|<target|state>|^2``."""
    if isinstance(state, PureState):
        if state.amplitudes.size != target.amplitudes.size:
            raise ValueError("dimension mismatch")
        f = abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2
    elif isinstance(state, DensityMatrix):
        if state.entries.shape[0] != target.amplitudes.size:
            raise ValueError("dimension mismatch")
        f = state.expectation(target)
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    return float(min(max(f, 0.0), 1.0))


def random_special_unitary(seed: int) -> np.ndarray:
    """Haar-random element of SU(2), deterministic for a given seed."""
    u = unitary_group.rvs(2, random_state=np.random.default_rng(seed))
    return u / np.sqrt(np.linalg.det(u))


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the permutation-symmetric subspace of ``n`` qubits."""
    from itertools import permutations

    dim = 2**n
    proj = np.zeros((dim, dim))
    perms = list(permutations(range(n)))
    idx = np.arange(dim).reshape((2,) * n)
    for perm in perms:
        permuted = np.transpose(idx, perm).reshape(-1)
        proj[permuted, np.arange(dim)] += 1
    return proj / len(perms)
