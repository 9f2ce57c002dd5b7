"""Remote state preparation protocols over a shared singlet.

Alice owns the first ``k/2`` qubits of the shared state; her partners own the
rest, in order. Each protocol is a complete product measurement on Alice's
side together with the set of outcomes she announces as successful.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from itertools import product
from typing import Optional

import numpy as np

from .qstate import (
    DensityMatrix,
    NullOutcomeError,
    ProductProjector,
    PureState,
    fidelity,
    partial_trace,
    project_subsystem,
    symmetric_projector,
    tensor_all,
)
from .singlets import HV, BasisPair, make_bell_pair, make_ghz, make_singlet, make_w3

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": SIGMA_Z,
}


class ProtocolKind(str, Enum):
    SINGLE_QUBIT = "SingleQubit"
    PRODUCT_COPIES = "ProductCopies"
    BELL = "Bell"
    W = "W"
    WBAR = "WBar"
    GHZ = "GHZ"
    NONMAX = "NonMaxEntangled"
    TRACE_MIXTURE = "TraceMixture"
    NO_MEASUREMENT = "NoMeasurementMixture"


_ALLOWED_K = {
    ProtocolKind.SINGLE_QUBIT: (2,),
    ProtocolKind.PRODUCT_COPIES: (2, 4, 6),
    ProtocolKind.BELL: (4,),
    ProtocolKind.NONMAX: (4,),
    ProtocolKind.W: (6,),
    ProtocolKind.WBAR: (6,),
    ProtocolKind.GHZ: (6,),
    ProtocolKind.TRACE_MIXTURE: (4, 6),
    ProtocolKind.NO_MEASUREMENT: (2, 4, 6),
}

_DEFAULT_K = {
    ProtocolKind.SINGLE_QUBIT: 2,
    ProtocolKind.PRODUCT_COPIES: 6,
    ProtocolKind.BELL: 4,
    ProtocolKind.NONMAX: 4,
    ProtocolKind.W: 6,
    ProtocolKind.WBAR: 6,
    ProtocolKind.GHZ: 6,
    ProtocolKind.TRACE_MIXTURE: 6,
    ProtocolKind.NO_MEASUREMENT: 6,
}

MIXTURE_KINDS = (ProtocolKind.TRACE_MIXTURE, ProtocolKind.NO_MEASUREMENT)


@dataclass(frozen=True)
class ProtocolSpec:
    """Which state Alice prepares and with what parameters.

    ``theta`` is used by GHZ only, ``alpha`` and ``sign`` by NonMaxEntangled,
    ``traced_count`` by TraceMixture. ``extended`` switches GHZ to accept
    every outcome that is Pauli-correctable to the target.
    """

    kind: ProtocolKind
    k: Optional[int] = None
    basis: BasisPair = HV
    theta: float = np.pi / 3
    alpha: Optional[float] = None
    sign: int = 1
    traced_count: int = 1
    extended: bool = False

    def __post_init__(self):
        kind = ProtocolKind(self.kind)
        object.__setattr__(self, "kind", kind)
        k = _DEFAULT_K[kind] if self.k is None else int(self.k)
        if k not in _ALLOWED_K[kind]:
            raise ValueError(f"{kind.value} requires k in {_ALLOWED_K[kind]}, got {k}")
        object.__setattr__(self, "k", k)
        if kind is ProtocolKind.NONMAX:
            if self.alpha is None:
                raise ValueError("NonMaxEntangled requires alpha")
            _check_alpha(self.alpha)
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if kind is ProtocolKind.TRACE_MIXTURE and not 1 <= self.traced_count < k // 2:
            raise ValueError(f"traced_count must be in [1, {k // 2 - 1}]")

    @property
    def n_alice(self) -> int:
        return self.k // 2


def _check_alpha(alpha: float):
    if not 0 < alpha < np.pi / 2 or min(alpha, np.pi / 2 - alpha) < 1e-12:
        raise ValueError(
            f"alpha must lie strictly inside (0, pi/2), got {alpha!r}; "
            "the endpoints are product targets (use ProductCopies)"
        )


@dataclass(frozen=True)
class RspOutcome:
    alice_outcome_label: str
    probability: float
    accepted: bool
    partner_state: object = None  # PureState, DensityMatrix or None for null outcomes
    correction: str = "none"
    fidelity: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "alice_outcome": self.alice_outcome_label,
            "probability": self.probability,
            "accepted": self.accepted,
            "correction": self.correction,
            "fidelity": self.fidelity,
        }
        s = self.partner_state
        if isinstance(s, PureState):
            d["partner_state"] = [[float(z.real), float(z.imag)] for z in s.amplitudes]
        elif isinstance(s, DensityMatrix):
            d["partner_density"] = [
                [[float(z.real), float(z.imag)] for z in row] for row in s.entries
            ]
        return d


def _combo(basis: BasisPair, a: float, b: float) -> PureState:
    return PureState.from_vector(a * basis.psi.amplitudes + b * basis.psi_bar.amplitudes)


def measurement_bases(spec: ProtocolSpec):
    """Per measured Alice qubit, the ordered pair (outcome 0, outcome 1)."""
    bp = spec.basis
    plain = (bp.psi, bp.psi_bar)
    kind = spec.kind
    if kind is ProtocolKind.GHZ:
        c, s = np.cos(spec.theta), np.sin(spec.theta)
        return [
            plain,
            (_combo(bp, c, s), _combo(bp, s, -c)),
            (_combo(bp, c, -s), _combo(bp, s, c)),
        ]
    if kind is ProtocolKind.NONMAX:
        c, s = np.cos(spec.alpha), spec.sign * np.sin(spec.alpha)
        return [(_combo(bp, c, s), _combo(bp, s, -c)), (_combo(bp, c, -s), _combo(bp, s, c))]
    if kind is ProtocolKind.TRACE_MIXTURE:
        return [plain] * (spec.n_alice - spec.traced_count)
    if kind is ProtocolKind.NO_MEASUREMENT:
        return []
    return [plain] * spec.n_alice


def _designated(spec: ProtocolSpec, bits: str) -> bool:
    kind, ones = spec.kind, bits.count("1")
    if kind in (ProtocolKind.SINGLE_QUBIT, ProtocolKind.PRODUCT_COPIES):
        return ones == len(bits)
    if kind is ProtocolKind.BELL:
        return ones == 1
    if kind is ProtocolKind.W:
        return ones == 2
    if kind is ProtocolKind.WBAR:
        return ones == 1
    # GHZ, NonMax and TraceMixture accept the all-zero outcome; the empty
    # measurement accepts its single outcome
    return ones == 0


def alice_projector_set(spec: ProtocolSpec):
    """Complete product measurement for Alice with acceptance flags.

    Returns a list of ``(label, ProductProjector, accepted)``. Labels are bit
    strings over the measured qubits (bit 0 is the first basis vector returned
    by :func:`measurement_bases` for that qubit).
    """
    bases = measurement_bases(spec)
    out = []
    for bits in product("01", repeat=len(bases)):
        bits = "".join(bits)
        proj = ProductProjector(tuple((i, bases[i][int(b)]) for i, b in enumerate(bits)))
        out.append((bits, proj, _designated(spec, bits)))
    if spec.kind is ProtocolKind.GHZ and spec.extended:
        correctable = set(_pauli_correctable_outcomes(spec))
        out = [(bits, p, acc or bits in correctable) for bits, p, acc in out]
    return out


def target_state(spec: ProtocolSpec) -> Optional[PureState]:
    """The pure state the accepted outcomes should leave with the partners."""
    bp, kind = spec.basis, spec.kind
    if kind in (ProtocolKind.SINGLE_QUBIT, ProtocolKind.PRODUCT_COPIES):
        return tensor_all([bp.psi] * spec.n_alice)
    if kind is ProtocolKind.BELL:
        return make_bell_pair(bp, "psi_plus_anticorrelated")
    if kind is ProtocolKind.W:
        return make_w3(bp)
    if kind is ProtocolKind.WBAR:
        return make_w3(bp, conjugate=True)
    if kind is ProtocolKind.GHZ:
        return make_ghz(bp)
    if kind is ProtocolKind.NONMAX:
        return nonmax_target(spec.alpha, bp)
    return None


def nonmax_target(alpha: float, basis: BasisPair = HV) -> PureState:
    c2, s2 = np.cos(alpha) ** 2, np.sin(alpha) ** 2
    vec = c2 * basis.ket("11").amplitudes - s2 * basis.ket("00").amplitudes
    return PureState(vec / np.sqrt(c2**2 + s2**2))


def conditional_mixture(shared: PureState, measured, traced):
    """Probability and partner density matrix for a partial Alice measurement."""
    n = shared.n_qubits
    alice = set(range(n // 2))
    measured = [(int(i), s) for i, s in measured]
    m_idx = {i for i, _ in measured}
    traced = {int(i) for i in traced}
    if m_idx & traced or (m_idx | traced) != alice:
        raise ValueError("measured and traced qubits must partition Alice's qubits")
    if measured:
        prob, rest = project_subsystem(shared, ProductProjector(tuple(measured)))
    else:
        prob, rest = 1.0, shared
    remaining = [q for q in range(n) if q not in m_idx]
    keep = [pos for pos, q in enumerate(remaining) if q not in alice]
    return prob, partial_trace(rest.to_density(), keep)


def partner_mixture(shared: PureState, measured, traced) -> DensityMatrix:
    """Partner state after Alice measures ``measured`` and ignores ``traced``."""
    return conditional_mixture(shared, measured, traced)[1]


def run_protocol(shared: PureState, spec: ProtocolSpec):
    """Every outcome of Alice's measurement with its exact probability."""
    if shared.n_qubits != spec.k:
        raise ValueError(f"shared state has {shared.n_qubits} qubits, protocol needs {spec.k}")
    target = target_state(spec)
    outcomes = []
    for bits, proj, accepted in alice_projector_set(spec):
        try:
            if spec.kind in MIXTURE_KINDS:
                measured_idx = set(proj.indices)
                traced = [q for q in range(spec.n_alice) if q not in measured_idx]
                prob, partner = conditional_mixture(shared, proj.targets, traced)
            else:
                prob, partner = project_subsystem(shared, proj)
        except NullOutcomeError as exc:
            prob, partner = exc.probability, None
        fid = fidelity(partner, target) if target is not None and partner is not None else None
        outcomes.append(RspOutcome(bits, prob, accepted, partner, "none", fid))
    return outcomes


def success_probability(spec: ProtocolSpec, shared: Optional[PureState] = None) -> float:
    shared = make_singlet(spec.k) if shared is None else shared
    return float(sum(o.probability for o in run_protocol(shared, spec) if o.accepted))


def is_equatorial(basis: BasisPair, atol: float = 1e-9) -> bool:
    return abs(abs(basis.psi.amplitudes[0]) - 1 / np.sqrt(2)) <= atol


def apply_equator_correction(outcome: RspOutcome, basis: BasisPair,
                             target: Optional[PureState] = None) -> RspOutcome:
    """Apply sigma_z to every partner qubit of ``outcome``.

    On the H/V equator sigma_z maps psi_bar to psi up to a phase. The corrected
    outcome is marked accepted when it reaches ``target`` with fidelity 1
    (within 1e-10), or unconditionally when no target is given.
    """
    if not is_equatorial(basis):
        raise ValueError("basis pair does not lie on the H/V equator; sigma_z is not a NOT gate there")
    state = outcome.partner_state
    if not isinstance(state, PureState):
        raise ValueError("equator correction needs a pure partner state")
    vec = state.amplitudes.reshape((2,) * state.n_qubits)
    for q in range(state.n_qubits):
        vec = np.moveaxis(np.tensordot(SIGMA_Z, vec, axes=([1], [q])), 0, q)
    corrected = PureState(vec.reshape(-1))
    fid = fidelity(corrected, target) if target is not None else None
    accepted = fid is None or fid > 1 - 1e-10
    return replace(outcome, partner_state=corrected, accepted=accepted,
                   correction="sigma_z_each", fidelity=fid)


def doubled_success_probability(spec: ProtocolSpec, shared: Optional[PureState] = None) -> float:
    """Success probability when rejected outcomes may be rescued by sigma_z corrections."""
    if not is_equatorial(spec.basis):
        raise ValueError("doubling needs an equatorial basis pair")
    shared = make_singlet(spec.k) if shared is None else shared
    target = target_state(spec)
    if target is None:
        raise ValueError(f"{spec.kind.value} has no pure target")
    total = 0.0
    for o in run_protocol(shared, spec):
        if o.accepted:
            total += o.probability
        elif o.partner_state is not None:
            if apply_equator_correction(o, spec.basis, target).accepted:
                total += o.probability
    return total


def nonmax_outcome(alpha: float, sign: int = 1, basis: BasisPair = HV):
    """Alice projects her two qubits of |Psi_4^-> onto cos a|psi> +- sin a|psi_bar>.

    ``sign`` is the sign on the first qubit; the second qubit carries the
    opposite one, which is what removes the cross terms from the partner state.
    """
    _check_alpha(alpha)
    spec = ProtocolSpec(ProtocolKind.NONMAX, basis=basis, alpha=alpha, sign=sign)
    bits, proj, _ = alice_projector_set(spec)[0]
    return project_subsystem(make_singlet(4), proj)


def _pauli_correctable_outcomes(spec: ProtocolSpec):
    base = replace(spec, extended=False)
    target = target_state(base)
    bp = spec.basis
    frame = np.column_stack([bp.psi.amplitudes, bp.psi_bar.amplitudes])
    ops = [frame @ p @ frame.conj().T for p in PAULIS.values()]
    for o in run_protocol(make_singlet(spec.k), base):
        if o.accepted or o.partner_state is None:
            continue
        if _best_local_correction(o.partner_state, target, ops) > 1 - 1e-10:
            yield o.alice_outcome_label


def _best_local_correction(state: PureState, target: PureState, ops) -> float:
    n = state.n_qubits
    best = 0.0
    for combo in product(ops, repeat=n):
        full = np.array([[1.0 + 0j]])
        for op in combo:
            full = np.kron(full, op)
        best = max(best, abs(np.vdot(target.amplitudes, full @ state.amplitudes)) ** 2)
    return best


def symmetrized_orthogonal_product(states) -> PureState:
    """Normalized symmetric projection of the product of states orthogonal to ``states``."""
    from .qstate import orthogonal

    prod_vec = tensor_all(orthogonal(s) for s in states).amplitudes
    return PureState.from_vector(symmetric_projector(len(states)) @ prod_vec)


def mixture_weights(rho: DensityMatrix, basis: BasisPair = HV) -> dict:
    """Populations of ``rho`` on the four symmetric three-qubit reference states."""
    refs = {
        "psi_bar^3": basis.ket("111"),
        "W3bar": make_w3(basis, conjugate=True),
        "W3": make_w3(basis),
        "psi^3": basis.ket("000"),
    }
    return {name: rho.expectation(s) for name, s in refs.items()}


# weights stated in the text for three Alice measurement patterns on |Psi_6^->
MIXTURE_CLAIMS = (
    {"id": "trace_one", "measured": 2, "claimed": {"psi_bar^3": 0.5, "W3bar": 0.5}},
    {"id": "trace_two", "measured": 1,
     "claimed": {"psi_bar^3": 0.25, "W3bar": 0.5, "W3": 0.25}},
    {"id": "trace_all", "measured": 0,
     "claimed": {"psi_bar^3": 0.25, "W3bar": 0.25, "W3": 0.25, "psi^3": 0.25}},
)


def mixture_claims_report(basis: BasisPair = HV, atol: float = 1e-10):
    """Compare each stated mixture with the one obtained from |Psi_6^->."""
    shared = make_singlet(6)
    rows = []
    for claim in MIXTURE_CLAIMS:
        m = claim["measured"]
        measured = [(i, basis.psi) for i in range(m)]
        traced = list(range(m, 3))
        prob, rho = conditional_mixture(shared, measured, traced)
        computed = mixture_weights(rho, basis)
        claimed = {name: claim["claimed"].get(name, 0.0) for name in computed}
        dev = max(abs(computed[n] - claimed[n]) for n in computed)
        rows.append({
            "id": claim["id"],
            "alice_measured_as_psi": m,
            "traced": 3 - m,
            "outcome_probability": prob,
            "claimed": claimed,
            "computed": computed,
            "max_deviation": dev,
            "agrees": dev < atol,
            "spectrum": sorted(float(x) for x in rho.eigenvalues())[::-1],
        })
    return rows


def ghz_basis_report(state: PureState, basis: BasisPair = HV, chis=None) -> dict:
    """Check the (|ddd> +- |aaa>)/sqrt2 form in equatorial bases d,a = (psi +- e^{i chi} psi_bar)/sqrt2.

    ``chi = 0`` is the real diagonal/antidiagonal pair.
    """
    chis = np.linspace(0, np.pi, 181) if chis is None else np.asarray(chis)

    def weights(chi):
        d = _combo(basis, 1, np.exp(1j * chi))
        a = _combo(basis, 1, -np.exp(1j * chi))
        ddd = abs(np.vdot(tensor_all([d] * 3).amplitudes, state.amplitudes)) ** 2
        aaa = abs(np.vdot(tensor_all([a] * 3).amplitudes, state.amplitudes)) ** 2
        return float(ddd), float(aaa)

    d0, a0 = weights(0.0)
    scan = [(float(c), *weights(c)) for c in chis]
    best = max(scan, key=lambda r: r[1] + r[2])
    return {
        "diagonal_weights": {"ddd": d0, "aaa": a0},
        "ghz_in_diagonal_basis": abs(d0 - 0.5) < 1e-10 and abs(a0 - 0.5) < 1e-10,
        "best_chi": best[0],
        "best_weights": {"ddd": best[1], "aaa": best[2]},
        "ghz_in_some_equatorial_basis": abs(best[1] - 0.5) < 1e-10 and abs(best[2] - 0.5) < 1e-10,
    }
