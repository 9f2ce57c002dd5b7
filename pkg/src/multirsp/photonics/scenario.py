"""Run a remote-preparation protocol on the photonic apparatus model."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from ..protocols import MIXTURE_KINDS, ProtocolSpec, alice_projector_set, measurement_bases, target_state
from ..qstate import DensityMatrix, NullOutcomeError, fidelity
from .apparatus import AnalysisSetting, PdcConfig, basis_unitary, exit_state
from .detection import DetectorConfig, conditional_partner_state
from .fock import ALICE_STATIONS, PARTNER_STATIONS


@dataclass
class PhotonicOutcome:
    label: str
    probability: float  # per pulse
    accepted: bool
    partner: Optional[DensityMatrix]
    fidelity: Optional[float] = None


@dataclass
class PhotonicRun:
    spec: ProtocolSpec
    outcomes: list = field(default_factory=list)

    @property
    def coincidence_probability(self) -> float:
        return float(sum(o.probability for o in self.outcomes))

    @property
    def accepted_probability(self) -> float:
        return float(sum(o.probability for o in self.outcomes if o.accepted))

    @property
    def success_fraction(self) -> float:
        """Accepted share of all post-selected coincidences (the renormalized success probability)."""
        total = self.coincidence_probability
        if total <= 0:
            raise NullOutcomeError(total, "no post-selected coincidences")
        return self.accepted_probability / total

    def renormalized(self) -> dict:
        total = self.coincidence_probability
        return {o.label: o.probability / total for o in self.outcomes}

    def prepared_state(self) -> DensityMatrix:
        acc = [o for o in self.outcomes if o.accepted and o.partner is not None]
        weight = sum(o.probability for o in acc)
        if weight < 1e-300:
            raise NullOutcomeError(weight, "accepted outcomes never occur")
        rho = sum(o.probability * o.partner.entries for o in acc) / weight
        return DensityMatrix.from_operator(rho)

    def prepared_fidelity(self) -> Optional[float]:
        target = target_state(self.spec)
        return None if target is None else fidelity(self.prepared_state(), target)


def stations_for(spec: ProtocolSpec):
    n = spec.n_alice
    return ALICE_STATIONS[:n], PARTNER_STATIONS[:n]


def alice_setting(spec: ProtocolSpec) -> AnalysisSetting:
    """Wave-plate analysis for Alice's measured stations (outcome 0 on the transmitted port)."""
    bases = measurement_bases(spec)
    alice, _ = stations_for(spec)
    return AnalysisSetting({alice[i]: basis_unitary(b[0]) for i, b in enumerate(bases)})


def run_photonic(spec: ProtocolSpec, pdc: PdcConfig, det: Optional[DetectorConfig] = None,
                 splittings=None, photon_cap: Optional[int] = None, fv=None) -> PhotonicRun:
    """Conditional partner states for every outcome of Alice's measurement.

    Alice uses the first ``k/2`` stations and the partners the first ``k/2``
    partner stations; the remaining stations must stay silent. Stations that a
    mixture protocol ignores still need a click, summed over both ports.
    """
    det = DetectorConfig() if det is None else det
    if pdc.p_max < spec.n_alice:
        raise ValueError(f"p_max={pdc.p_max} cannot produce {spec.n_alice} pairs")
    fv = exit_state(pdc, splittings=splittings, photon_cap=photon_cap) if fv is None else fv
    alice, partners = stations_for(spec)
    setting = alice_setting(spec)
    n_measured = len(measurement_bases(spec))
    traced = alice[n_measured:]
    target = target_state(spec)
    run = PhotonicRun(spec)
    for bits, _, accepted in alice_projector_set(spec):
        prob, rho = 0.0, 0.0
        for ports in product((0, 1), repeat=len(traced)):
            clicks = {s: None for s in ALICE_STATIONS}
            clicks.update({alice[i]: int(b) for i, b in enumerate(bits)})
            clicks.update(dict(zip(traced, ports)))
            try:
                p, r = conditional_partner_state(fv, clicks, setting, det, partners)
            except NullOutcomeError:
                continue
            prob += p
            rho = rho + p * r.entries
        partner = DensityMatrix.from_operator(rho) if prob > 0 else None
        fid = fidelity(partner, target) if partner is not None and target is not None else None
        run.outcomes.append(PhotonicOutcome(bits, prob, accepted, partner, fid))
    return run


def is_mixture(spec: ProtocolSpec) -> bool:
    return spec.kind in MIXTURE_KINDS
