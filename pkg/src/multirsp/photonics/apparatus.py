"""Down-conversion source, splitter fan-out, wave-plate analysis and post-selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt
from typing import Dict, Optional, Sequence

import numpy as np

from ..qstate import NullOutcomeError, PureState, is_unitary
from .fock import (
    EXIT_STATIONS,
    MODES,
    FockVector,
    apply_beam_splitter,
    apply_polarization_unitary,
    check_spatial,
    mode_index,
)

DEFAULT_TANH2 = 1 / 15
DEFAULT_SPLITTINGS = (1 / sqrt(2), 1 / sqrt(2))


def k_from_tanh2(tanh2: float) -> float:
    """Squeezing parameter K for a given ``tanh(K)**2``."""
    if not 0 < tanh2 < 1:
        raise ValueError("tanh^2 K must lie in (0, 1)")
    return float(np.arctanh(np.sqrt(tanh2)))


@dataclass(frozen=True)
class PdcConfig:
    """Source parameters.

    ``phi`` is the phase on the H_a V_b pair creation relative to V_a H_b.
    With ``phi = pi`` the post-selected states are exactly the singlets
    ``|Psi_k^->``; that is the compensated operating point and the default.
    """

    K: float = field(default_factory=lambda: k_from_tanh2(DEFAULT_TANH2))
    phi: float = np.pi
    p_max: int = 4

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("K must be positive")
        if int(self.p_max) < 1:
            raise ValueError("p_max must be at least 1")
        object.__setattr__(self, "p_max", int(self.p_max))

    @property
    def tanh2(self) -> float:
        return float(np.tanh(self.K) ** 2)

    def order_weight(self, p: int) -> float:
        """Probability of exactly ``p`` pairs: ``(p+1) tanh^{2p} K / cosh^4 K``."""
        return (p + 1) * np.tanh(self.K) ** (2 * p) / np.cosh(self.K) ** 4


def _source_occupation(m: int, p: int):
    return {("a", "H"): m, ("a", "V"): p - m, ("b", "H"): p - m, ("b", "V"): m}


@lru_cache(maxsize=None)
def _order_component(p: int, phi: float, photon_cap: int) -> FockVector:
    """Normalized p-pair term: sum_m e^{i m phi} |m H_a, (p-m) V_a, (p-m) H_b, m V_b> / sqrt(p+1)."""
    terms = {}
    for m in range(p + 1):
        occ = [0] * len(MODES)
        for (s, pol), n in _source_occupation(m, p).items():
            occ[mode_index(s, pol)] = n
        terms[tuple(occ)] = np.exp(1j * m * phi) / sqrt(p + 1)
    return FockVector(terms, photon_cap)


def build_pdc_state(cfg: PdcConfig, photon_cap: Optional[int] = None) -> FockVector:
    """Truncated two-mode down-conversion state, orders ``p = 0..p_max``."""
    cap = 2 * cfg.p_max if photon_cap is None else int(photon_cap)
    if cap < 2 * cfg.p_max:
        raise ValueError(f"photon_cap {cap} cannot hold {cfg.p_max} pairs")
    th, ch2 = np.tanh(cfg.K), np.cosh(cfg.K) ** 2
    terms = {}
    for p in range(cfg.p_max + 1):
        for occ, a in _order_component(p, cfg.phi, cap).terms.items():
            terms[occ] = sqrt(p + 1) * th**p / ch2 * a
    norm = sum(abs(a) ** 2 for a in terms.values())
    return FockVector(terms, cap, max(0.0, 1.0 - norm))


def pdc_norm_closed_form(K: float, p_max: int) -> float:
    t2 = np.tanh(K) ** 2
    return float(sum((p + 1) * t2**p for p in range(p_max + 1)) / np.cosh(K) ** 4)


def _fanout_arm(fv: FockVector, src: str, t1: float, t2: float) -> FockVector:
    s1, s2, s3 = (src + "1", src + "2", src + "3")
    fv = apply_beam_splitter(fv, src, s1, s2, t1)
    return apply_beam_splitter(fv, s2, s2, s3, t2)


def _normalize_splittings(splittings) -> tuple:
    if splittings is None:
        splittings = DEFAULT_SPLITTINGS
    splittings = tuple(float(t) for t in splittings)
    if len(splittings) == 2:
        splittings = splittings * 2
    if len(splittings) != 4:
        raise ValueError("splittings must have 2 entries (shared by both arms) or 4")
    for t in splittings:
        if not 0 < t < 1:
            raise ValueError(f"transmissivity must lie in (0, 1), got {t!r}")
    return splittings


def build_fanout_network(fv: FockVector, splittings=None) -> FockVector:
    """Two cascaded splitters per source arm: ``a -> a1 + (a2, a3)``, same for ``b``.

    ``splittings`` holds the transmissivities ``(t1, t2)`` used on both arms,
    or ``(ta1, ta2, tb1, tb2)``.
    """
    ta1, ta2, tb1, tb2 = _normalize_splittings(splittings)
    fv = _fanout_arm(fv, "a", ta1, ta2)
    return _fanout_arm(fv, "b", tb1, tb2)


@lru_cache(maxsize=64)
def _fanned_component(p: int, phi: float, photon_cap: int, splittings: tuple) -> FockVector:
    return build_fanout_network(_order_component(p, phi, photon_cap), splittings)


def exit_state(cfg: PdcConfig, splittings=None, photon_cap: Optional[int] = None,
               orders: Optional[Sequence[int]] = None) -> FockVector:
    """Source followed by the default fan-out, optionally keeping only some orders."""
    cap = 2 * cfg.p_max if photon_cap is None else int(photon_cap)
    spl = _normalize_splittings(splittings)
    th, ch2 = np.tanh(cfg.K), np.cosh(cfg.K) ** 2
    orders = range(cfg.p_max + 1) if orders is None else orders
    terms: Dict[tuple, complex] = {}
    for p in orders:
        if not 0 <= p <= cfg.p_max:
            raise ValueError(f"order {p} outside 0..{cfg.p_max}")
        c = sqrt(p + 1) * th**p / ch2
        for occ, a in _fanned_component(p, float(cfg.phi), cap, spl).terms.items():
            terms[occ] = c * a
    norm = sum(abs(a) ** 2 for a in terms.values())
    return FockVector(terms, cap, max(0.0, 1.0 - norm))


def order_state(p: int, phi: float = np.pi, splittings=None, photon_cap: int = 8) -> FockVector:
    """Normalized p-pair component after the fan-out."""
    return _fanned_component(p, float(phi), photon_cap, _normalize_splittings(splittings))


# --- polarization analysis -------------------------------------------------


def hwp(theta_deg: float) -> np.ndarray:
    t = np.deg2rad(2 * theta_deg)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


def qwp(theta_deg: float) -> np.ndarray:
    t = np.deg2rad(theta_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]],
        dtype=complex,
    )


def waveplate_unitary(hwp_deg: float, qwp_deg: float) -> np.ndarray:
    """Jones matrix of the HWP followed by the QWP; the PBS then transmits H."""
    return qwp(qwp_deg) @ hwp(hwp_deg)


def basis_unitary(psi) -> np.ndarray:
    """Unitary sending ``psi`` to H and its orthogonal partner to V."""
    from ..qstate import orthogonal, qubit

    psi = qubit(psi)
    bar = orthogonal(psi)
    return np.vstack([psi.amplitudes.conj(), bar.amplitudes.conj()])


def waveplate_angles(psi, starts: int = 12):
    """HWP and QWP angles (degrees) whose analysis transmits ``psi``."""
    from scipy.optimize import minimize

    from ..qstate import qubit

    v = qubit(psi).amplitudes

    def loss(x):
        u = waveplate_unitary(*x)
        return 1 - abs((u @ v)[0]) ** 2

    best = None
    for h0 in np.linspace(0, 90, starts, endpoint=False):
        for q0 in (0.0, 45.0, 90.0, 135.0):
            res = minimize(loss, [h0, q0], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
            if best is None or res.fun < best.fun:
                best = res
            if best.fun < 1e-14:
                return tuple(float(x) for x in best.x)
    return tuple(float(x) for x in best.x)


@dataclass(frozen=True)
class AnalysisSetting:
    """Polarization unitary applied in front of each exit station's PBS."""

    unitaries: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for spatial, u in self.unitaries.items():
            if spatial not in EXIT_STATIONS:
                raise ValueError(f"analysis is only defined on exit stations, got {spatial!r}")
            u = np.asarray(u, dtype=complex)
            if u.shape != (2, 2) or not is_unitary(u):
                raise ValueError(f"analysis matrix for {spatial} is not a 2x2 unitary")
            cleaned[spatial] = u
        object.__setattr__(self, "unitaries", cleaned)

    @classmethod
    def identity(cls) -> "AnalysisSetting":
        return cls({})

    @classmethod
    def from_bases(cls, bases: Dict[str, object]) -> "AnalysisSetting":
        """Per-station transmitted polarization, e.g. ``{"a1": "D"}``."""
        return cls({s: basis_unitary(psi) for s, psi in bases.items()})

    @classmethod
    def from_waveplates(cls, angles: Dict[str, Sequence[float]]) -> "AnalysisSetting":
        return cls({s: waveplate_unitary(h, q) for s, (h, q) in angles.items()})

    def get(self, spatial: str) -> np.ndarray:
        return self.unitaries.get(spatial, np.eye(2, dtype=complex))

    def restricted(self, stations) -> "AnalysisSetting":
        return AnalysisSetting({s: u for s, u in self.unitaries.items() if s in stations})


def apply_analysis(fv: FockVector, setting: AnalysisSetting) -> FockVector:
    for spatial in EXIT_STATIONS:
        if spatial in setting.unitaries:
            fv = apply_polarization_unitary(fv, spatial, setting.unitaries[spatial])
    return fv


# --- post-selection --------------------------------------------------------


def postselect_one_photon_per_mode(fv: FockVector, modes: Sequence[str] = EXIT_STATIONS):
    """Project onto exactly one photon in each listed mode and none elsewhere.

    Returns the probability and the polarization qubit state, qubit ``i``
    belonging to ``modes[i]`` (H -> 0, V -> 1).
    """
    modes = [check_spatial(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ValueError("post-selection modes must be distinct")
    pairs = [(mode_index(m, "H"), mode_index(m, "V")) for m in modes]
    listed = {i for pair in pairs for i in pair}
    others = [i for i in range(len(MODES)) if i not in listed]
    n = len(modes)
    vec = np.zeros(2**n, dtype=complex)
    for occ, amp in fv.terms.items():
        if any(occ[i] for i in others):
            continue
        idx = 0
        for h, v in pairs:
            if occ[h] + occ[v] != 1:
                break
            idx = 2 * idx + occ[v]
        else:
            vec[idx] += amp
    prob = float(np.vdot(vec, vec).real)
    if prob < 1e-15:
        raise NullOutcomeError(prob, "no amplitude with one photon per mode")
    return prob, PureState(vec / np.sqrt(prob))


def phase_frame(phi: float) -> np.ndarray:
    """Local polarization phase relating source phase ``phi`` to the singlet frame.

    The post-selected state for phase ``phi`` equals the singlet with this
    matrix applied to every qubit from arm ``a``.
    """
    return np.diag([np.exp(1j * (phi - np.pi)), 1.0])
