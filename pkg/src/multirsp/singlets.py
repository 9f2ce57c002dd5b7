"""Rotationally invariant singlets, W/GHZ/Bell constructors and the branch oracle.

All constructors take a :class:`BasisPair`; bit 0 of a label stands for
``psi`` and bit 1 for ``psi_bar``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .qstate import (
    ATOL,
    PureState,
    fidelity,
    orthogonal,
    qubit,
    symmetric_projector,
    tensor_all,
)


@dataclass(frozen=True)
class BasisPair:
    psi: PureState
    psi_bar: PureState

    def __post_init__(self):
        psi, psi_bar = qubit(self.psi), qubit(self.psi_bar)
        if psi.n_qubits != 1 or psi_bar.n_qubits != 1:
            raise ValueError("basis states must be single-qubit")
        if abs(np.vdot(psi.amplitudes, psi_bar.amplitudes)) > ATOL:
            raise ValueError("basis states are not orthogonal")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "psi_bar", psi_bar)

    @classmethod
    def from_psi(cls, psi) -> "BasisPair":
        psi = qubit(psi)
        return cls(psi, orthogonal(psi))

    @classmethod
    def from_labels(cls, name: str) -> "BasisPair":
        """``"HV"``, ``"DA"`` or ``"LR"``."""
        if len(name) != 2:
            raise ValueError(f"basis name must have two letters, got {name!r}")
        return cls(qubit(name[0]), qubit(name[1]))

    def rotated(self, u) -> "BasisPair":
        u = np.asarray(u)
        return BasisPair(PureState(u @ self.psi.amplitudes), PureState(u @ self.psi_bar.amplitudes))

    def state(self, bit: int) -> PureState:
        return self.psi_bar if int(bit) else self.psi

    def ket(self, bits: str) -> PureState:
        """Product ket for a bit string, e.g. ``"011"`` -> psi psi_bar psi_bar."""
        return tensor_all(self.state(b) for b in bits)


HV = BasisPair.from_labels("HV")


def _combine(basis: BasisPair, terms) -> PureState:
    vec = sum(c * basis.ket(bits).amplitudes for bits, c in terms)
    return PureState.from_vector(vec)


def make_singlet(k: int) -> PureState:
    """``|Psi_k^->`` in the H/V basis, k in {2, 4, 6}."""
    if k == 2:
        return _combine(HV, [("01", 1), ("10", -1)])
    if k == 4:
        terms = [("0011", 1 / np.sqrt(3)), ("1100", 1 / np.sqrt(3))]
        terms += [(b, -1 / (2 * np.sqrt(3))) for b in ("0101", "0110", "1001", "1010")]
        return PureState(sum(c * HV.ket(b).amplitudes for b, c in terms))
    if k == 6:
        one_v = ("100", "010", "001")
        two_v = ("110", "101", "011")
        terms = [("000111", 0.5), ("111000", -0.5)]
        terms += [(a + b, -1 / 6) for a in one_v for b in two_v]
        terms += [(a + b, 1 / 6) for a in two_v for b in one_v]
        return PureState(sum(c * HV.ket(b).amplitudes for b, c in terms))
    raise ValueError(f"singlet size must be 2, 4 or 6, got {k}")


def make_w3(basis: BasisPair = HV, conjugate: bool = False) -> PureState:
    """W3 (one psi_bar) or, with ``conjugate``, W3-bar (one psi)."""
    flip = "1" if not conjugate else "0"
    keep = "0" if not conjugate else "1"
    labels = [keep * i + flip + keep * (2 - i) for i in range(3)]
    return _combine(basis, [(b, 1) for b in labels])


def make_ghz(basis: BasisPair = HV, sign_pattern=(1, -1, -1, -1)) -> PureState:
    """``(s0|bbb> + s1|bpp> + s2|pbp> + s3|ppb>)/2`` with p=psi, b=psi_bar."""
    if len(sign_pattern) != 4:
        raise ValueError("sign_pattern needs four entries")
    labels = ("111", "100", "010", "001")
    return _combine(basis, list(zip(labels, sign_pattern)))


def make_bell_pair(basis: BasisPair = HV, which: str = "psi_plus_anticorrelated") -> PureState:
    if which == "psi_plus_anticorrelated":
        return _combine(basis, [("01", 1), ("10", 1)])
    if which == "psi_plus_correlated":
        return _combine(basis, [("00", 1), ("11", 1)])
    if which == "singlet":
        return make_singlet(2)
    raise ValueError(f"unknown Bell pair {which!r}")


def canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    vec = np.asarray(vec, dtype=complex)
    nz = np.flatnonzero(np.abs(vec) > 1e-12)
    if nz.size == 0:
        return vec
    a = vec[nz[0]]
    return vec * (abs(a) / a)


@dataclass(frozen=True)
class Branch:
    alice_bits: tuple
    alice: PureState
    partner: PureState
    coefficient: complex


@dataclass(frozen=True)
class DecompositionReport:
    k: int
    basis: BasisPair
    branches: tuple
    findings: tuple = field(default=())

    def reconstruct(self) -> np.ndarray:
        return sum(
            b.coefficient * np.kron(b.alice.amplitudes, b.partner.amplitudes)
            for b in self.branches
        )

    def reconstruction_fidelity(self) -> float:
        return float(abs(np.vdot(make_singlet(self.k).amplitudes, self.reconstruct())) ** 2)

    def to_dict(self) -> dict:
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        def vec(s):
            return [cplx(z) for z in s.amplitudes]

        return {
            "k": self.k,
            "basis": {"psi": vec(self.basis.psi), "psi_bar": vec(self.basis.psi_bar)},
            "branches": [
                {
                    "alice_kets": list(b.alice_bits),
                    "alice": vec(b.alice),
                    "partner": vec(b.partner),
                    "coefficient": cplx(b.coefficient),
                }
                for b in self.branches
            ],
            "reconstruction_fidelity": self.reconstruction_fidelity(),
            "findings": [dict(f) for f in self.findings],
        }


def _basis_vectors(basis: BasisPair, n: int):
    for bits in product("01", repeat=n):
        bits = "".join(bits)
        yield bits, basis.ket(bits).amplitudes


def decompose_singlet(k: int, basis: BasisPair = HV) -> DecompositionReport:
    """Expand ``|Psi_k^->`` over product kets of Alice's half, grouping equal partners."""
    if k not in (4, 6):
        raise ValueError(f"decomposition is defined for k in {{4, 6}}, got {k}")
    half = k // 2
    psi = make_singlet(k).amplitudes.reshape(2**half, 2**half)

    groups = []  # [partner_vec, [(bits, alice_vec, c)]]
    for bits, a in _basis_vectors(basis, half):
        w = a.conj() @ psi
        norm = np.linalg.norm(w)
        if norm < 1e-12:
            continue
        p = canonical_phase(w / norm)
        c = np.vdot(p, w)
        for g in groups:
            if abs(abs(np.vdot(g[0], p)) - 1) < 1e-10:
                g[1].append((bits, a, np.vdot(g[0], w)))
                break
        else:
            groups.append([p, [(bits, a, c)]])

    branches = []
    for p, members in groups:
        alice_vec = sum(c * a for _, a, c in members)
        alice_can = canonical_phase(alice_vec / np.linalg.norm(alice_vec))
        coeff = complex(np.vdot(alice_can, alice_vec))
        branches.append(
            Branch(
                alice_bits=tuple(bits for bits, _, _ in members),
                alice=PureState(alice_can),
                partner=PureState(p),
                coefficient=coeff,
            )
        )
    report = DecompositionReport(k=k, basis=basis, branches=tuple(branches))
    return DecompositionReport(k, basis, report.branches, tuple(_findings(report)))


def branch_for(report: DecompositionReport, alice_bits: str) -> Branch:
    for b in report.branches:
        if alice_bits in b.alice_bits:
            return b
    raise KeyError(alice_bits)


def _findings(report: DecompositionReport):
    basis = report.basis
    if report.k == 4:
        b = branch_for(report, "01")
        f_anti = fidelity(b.partner, make_bell_pair(basis, "psi_plus_anticorrelated"))
        f_corr = fidelity(b.partner, make_bell_pair(basis, "psi_plus_correlated"))
        yield {
            "id": "psi2_plus_variant",
            "claim": "partner of Alice (psi psi_bar + psi_bar psi) is (|psi psi> + |psi_bar psi_bar>)",
            "fidelity_with_correlated": f_corr,
            "fidelity_with_anticorrelated": f_anti,
            "matches_printed": f_corr > 1 - 1e-10,
            "verdict": "anticorrelated (|psi psi_bar> + |psi_bar psi>)/sqrt2"
            if f_anti > 1 - 1e-10 else "unresolved",
        }
        # printed coefficient: +1/sqrt6 on unnormalized Alice ket times normalized Bell pair
        coeff = b.coefficient / np.sqrt(len(b.alice_bits))
        yield {
            "id": "psi2_plus_coefficient",
            "claim": "coefficient +1/sqrt(6)",
            "computed": [float(coeff.real), float(coeff.imag)],
            "matches_printed": abs(coeff - 1 / np.sqrt(6)) < 1e-10,
        }
    else:
        wbar = make_w3(basis, conjugate=True)
        w = make_w3(basis)
        with_wbar = sorted(
            bits for br in report.branches if fidelity(br.partner, wbar) > 1 - 1e-10
            for bits in br.alice_bits
        )
        with_w = sorted(
            bits for br in report.branches if fidelity(br.partner, w) > 1 - 1e-10
            for bits in br.alice_bits
        )
        printed = ["100", "010", "011"]
        yield {
            "id": "wbar_third_ket",
            "claim": "Alice kets accompanying W3-bar are psi_bar psi psi, psi psi_bar psi, psi psi_bar psi_bar",
            "printed": printed,
            "computed_with_wbar": with_wbar,
            "computed_with_w": with_w,
            "matches_printed": sorted(printed) == with_wbar,
            "verdict": "third ket is psi psi psi_bar; psi psi_bar psi_bar accompanies W3"
            if "001" in with_wbar and "011" in with_w else "unresolved",
        }


def symmetric_fraction(state: PureState) -> float:
    """Squared norm of the projection onto the symmetric subspace."""
    proj = symmetric_projector(state.n_qubits)
    v = proj @ state.amplitudes
    return float(np.vdot(v, v).real)
