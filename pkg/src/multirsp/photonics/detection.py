"""Lossy threshold detection, click statistics and conditional partner states.

Click patterns are 12-bit masks in detector order ``a1H a1V a2H ... b3V``;
``format(mask, "012b")[i]`` is detector ``i``. H/V here name the transmitted
and reflected PBS ports, which coincide with H/V only for identity analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, sqrt
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from ..qstate import DensityMatrix, NullOutcomeError
from .apparatus import AnalysisSetting, PdcConfig, apply_analysis, exit_state
from .fock import (
    ALICE_STATIONS,
    DETECTOR_MODE_INDEX,
    DETECTORS,
    EXIT_STATIONS,
    MODES,
    PARTNER_STATIONS,
    FockVector,
    mode_index,
)

N_DET = len(DETECTORS)


@dataclass(frozen=True)
class DetectorConfig:
    """Per-detector efficiency and dark-count probability per coincidence window."""

    efficiency: object = 1.0
    dark_count_prob: object = 0.0

    def __post_init__(self):
        eta = np.broadcast_to(np.asarray(self.efficiency, dtype=float), (N_DET,)).copy()
        dark = np.broadcast_to(np.asarray(self.dark_count_prob, dtype=float), (N_DET,)).copy()
        if np.any(eta <= 0) or np.any(eta > 1):
            raise ValueError("detector efficiency must lie in (0, 1]")
        if np.any(dark < 0) or np.any(dark > 0.01):
            raise ValueError("dark count probability must lie in [0, 0.01]")
        eta.setflags(write=False)
        dark.setflags(write=False)
        object.__setattr__(self, "efficiency", eta)
        object.__setattr__(self, "dark_count_prob", dark)

    def eta(self, spatial: str, pol: str) -> float:
        return float(self.efficiency[DETECTORS.index((spatial, pol))])

    def dark(self, spatial: str, pol: str) -> float:
        return float(self.dark_count_prob[DETECTORS.index((spatial, pol))])


@dataclass(frozen=True)
class ClickPattern:
    fired: tuple

    def __post_init__(self):
        fired = tuple(bool(x) for x in self.fired)
        if len(fired) != N_DET:
            raise ValueError(f"click pattern needs {N_DET} entries")
        object.__setattr__(self, "fired", fired)

    @classmethod
    def from_mask(cls, mask: int) -> "ClickPattern":
        return cls(tuple(c == "1" for c in format(int(mask), f"0{N_DET}b")))

    @property
    def mask(self) -> int:
        return int("".join("1" if f else "0" for f in self.fired), 2)

    def station(self, spatial: str) -> tuple:
        i = EXIT_STATIONS.index(spatial)
        return self.fired[2 * i], self.fired[2 * i + 1]

    def __str__(self):
        return format(self.mask, f"0{N_DET}b")


def mask_string(mask: int) -> str:
    return format(int(mask), f"0{N_DET}b")


def station_clicks(labels: str, stations: Sequence[str] = ALICE_STATIONS) -> Dict[str, Optional[int]]:
    """Parse ``"HVV"`` or ``"H_V"`` into ``{station: port}`` (0 transmitted, 1 reflected, None silent)."""
    if len(labels) != len(stations):
        raise ValueError(f"need one symbol per station {stations}, got {labels!r}")
    out = {}
    for s, ch in zip(stations, labels):
        if ch in "H0":
            out[s] = 0
        elif ch in "V1":
            out[s] = 1
        elif ch in "_-.":
            out[s] = None
        else:
            raise ValueError(f"unknown click symbol {ch!r}")
    return out


def pattern_from_stations(clicks: Mapping[str, Optional[int]]) -> ClickPattern:
    fired = [False] * N_DET
    for s, port in clicks.items():
        if port is not None:
            fired[2 * EXIT_STATIONS.index(s) + port] = True
    return ClickPattern(tuple(fired))


def fire_probability(n, eta, dark=0.0):
    """Threshold detector: ``1 - (1 - dark)(1 - eta)^n``."""
    return 1 - (1 - dark) * (1 - eta) ** np.asarray(n)


def _detector_weights(fv: FockVector):
    """Unique detector occupations (T x 12) with their summed probabilities."""
    acc: Dict[tuple, float] = {}
    for occ, amp in fv.terms.items():
        key = tuple(occ[i] for i in DETECTOR_MODE_INDEX)
        acc[key] = acc.get(key, 0.0) + abs(amp) ** 2
    occs = np.array(list(acc.keys()), dtype=float).reshape(-1, N_DET)
    weights = np.array(list(acc.values()), dtype=float)
    return occs, weights


def click_distribution(fv: FockVector, setting: Optional[AnalysisSetting] = None,
                       det: Optional[DetectorConfig] = None, chunk: int = 512) -> Dict[int, float]:
    """Probability of every click pattern after analysis and lossy threshold detection.

    Photons outside the exit stations are never detected. The probabilities
    sum to the captured norm of ``fv``.
    """
    det = DetectorConfig() if det is None else det
    if setting is not None:
        fv = apply_analysis(fv, setting)
    occs, weights = _detector_weights(fv)
    q = fire_probability(occs, det.efficiency[None, :], det.dark_count_prob[None, :])
    total = np.zeros(2**N_DET)
    for start in range(0, len(weights), chunk):
        qc = q[start:start + chunk]
        arr = weights[start:start + chunk, None]
        for j in range(N_DET):
            arr = np.stack([arr * (1 - qc[:, j:j + 1]), arr * qc[:, j:j + 1]], axis=-1)
            arr = arr.reshape(arr.shape[0], -1)
        total += arr.sum(axis=0)
    return {int(m): float(p) for m, p in enumerate(total) if p > 0}


def one_click_per_station(mask: int, stations: Sequence[str] = EXIT_STATIONS) -> bool:
    """Exactly one of the two detectors fired at each listed station, none elsewhere."""
    bits = mask_string(mask)
    for i, s in enumerate(EXIT_STATIONS):
        pair = bits[2 * i:2 * i + 2]
        if s in stations:
            if pair not in ("01", "10"):
                return False
        elif pair != "00":
            return False
    return True


def conditional_click_distribution(dist: Mapping[int, float],
                                   stations: Sequence[str] = EXIT_STATIONS) -> Dict[int, float]:
    kept = {m: p for m, p in dist.items() if one_click_per_station(m, stations)}
    total = sum(kept.values())
    if total < 1e-15:
        raise NullOutcomeError(total, "no coincidence of the requested order")
    return {m: p / total for m, p in kept.items()}


def sample_clicks(dist: Mapping[int, float], shots: int, seed: int) -> Dict[int, int]:
    """Multinomial sample of ``shots`` patterns, renormalized over the captured norm."""
    if int(shots) <= 0:
        raise ValueError("shots must be a positive integer")
    masks = sorted(dist)
    p = np.array([dist[m] for m in masks], dtype=float)
    if p.sum() <= 0:
        raise ValueError("distribution has no weight")
    counts = np.random.default_rng(seed).multinomial(int(shots), p / p.sum())
    return {m: int(c) for m, c in zip(masks, counts)}


# --- conditional partner state --------------------------------------------


def _loss_amp(n: int, s: int, eta: float) -> float:
    """Amplitude for ``s`` of ``n`` photons to survive a loss channel of transmission ``eta``."""
    return sqrt(comb(n, s) * eta**s * (1 - eta) ** (n - s))


def _normalize_alice(alice_pattern) -> Dict[str, Optional[int]]:
    if isinstance(alice_pattern, str):
        return station_clicks(alice_pattern)
    if isinstance(alice_pattern, ClickPattern):
        out = {}
        for s in ALICE_STATIONS:
            h, v = alice_pattern.station(s)
            if h and v:
                raise ValueError(f"both detectors fired at {s}; not a qubit outcome")
            out[s] = 0 if h else (1 if v else None)
        return out
    if isinstance(alice_pattern, Mapping):
        return {s: alice_pattern.get(s) for s in ALICE_STATIONS}
    raise TypeError("alice_pattern must be a string, ClickPattern or station mapping")


def conditional_partner_state(fv: FockVector, alice_pattern, setting: Optional[AnalysisSetting] = None,
                              det: Optional[DetectorConfig] = None,
                              partner_stations: Sequence[str] = PARTNER_STATIONS):
    """Partner polarization state given Alice's clicks.

    Every detector mode first loses photons binomially (Kraus operators of a
    beam splitter to the environment). Alice's stations are then read out with
    threshold detectors in her analysis basis. Each listed partner station must
    hold exactly one surviving photon and the other partner stations none.

    Returns the probability of that event and the partner density matrix in
    the H/V frame, qubits ordered as ``partner_stations``.
    """
    det = DetectorConfig() if det is None else det
    alice = _normalize_alice(alice_pattern)
    partner_stations = tuple(partner_stations)
    for s in partner_stations:
        if s not in PARTNER_STATIONS:
            raise ValueError(f"{s!r} is not a partner station")
    if setting is not None:
        fv = apply_analysis(fv, setting.restricted(ALICE_STATIONS))

    # per detector mode: list of (surviving count, amplitude factor) given n
    alice_modes = []
    for s in ALICE_STATIONS:
        port = alice[s]
        for k, pol in enumerate(("H", "V")):
            alice_modes.append((mode_index(s, pol), port == k, det.eta(s, pol), det.dark(s, pol)))
    partner_modes = [
        (mode_index(s, "H"), mode_index(s, "V"), det.eta(s, "H"), det.eta(s, "V"))
        for s in partner_stations
    ]
    silent_partner = [
        (mode_index(s, pol), det.eta(s, pol))
        for s in PARTNER_STATIONS if s not in partner_stations for pol in ("H", "V")
    ]
    monitored = {i for i, *_ in alice_modes}
    monitored |= {i for h, v, *_ in partner_modes for i in (h, v)}
    monitored |= {i for i, _ in silent_partner}
    unmonitored = [i for i in range(len(MODES)) if i not in monitored]

    n_part = len(partner_stations)
    vectors: Dict[tuple, np.ndarray] = {}
    click_weight: Dict[tuple, float] = {}

    for occ, amp in fv.terms.items():
        base = amp
        env = [occ[i] for i in unmonitored]  # photons that never reach a detector
        # silent partner stations: all photons must be lost
        for i, eta in silent_partner:
            base *= _loss_amp(occ[i], 0, eta)
            env.append(occ[i])
        if base == 0:
            continue
        # Alice: enumerate surviving counts consistent with the click pattern
        alice_choices = []
        for i, fires, eta, dark in alice_modes:
            n = occ[i]
            opts = []
            for s in range(n + 1):
                p_fire = 1.0 if s > 0 else dark
                w = p_fire if fires else 1 - p_fire
                if w > 0:
                    opts.append((s, _loss_amp(n, s, eta), w))
            if not opts:
                break
            alice_choices.append(opts)
        else:
            # partner: exactly one survivor per listed station
            partner_choices = []
            for h, v, eta_h, eta_v in partner_modes:
                nh, nv = occ[h], occ[v]
                opts = []
                if nh >= 1:
                    opts.append((0, _loss_amp(nh, 1, eta_h) * _loss_amp(nv, 0, eta_v), (nh - 1, nv)))
                if nv >= 1:
                    opts.append((1, _loss_amp(nh, 0, eta_h) * _loss_amp(nv, 1, eta_v), (nh, nv - 1)))
                if not opts:
                    break
                partner_choices.append(opts)
            else:
                for a_sel in product(*alice_choices):
                    a_amp = base
                    a_w = 1.0
                    a_key = []
                    for (s, f, w), (i, *_rest) in zip(a_sel, alice_modes):
                        a_amp *= f
                        a_w *= w
                        a_key.append((s, occ[i] - s))
                    for p_sel in product(*partner_choices):
                        val = a_amp
                        idx = 0
                        lost = []
                        for bit, f, l in p_sel:
                            val *= f
                            idx = 2 * idx + bit
                            lost.append(l)
                        if val == 0:
                            continue
                        key = (tuple(a_key), tuple(lost), tuple(env))
                        vec = vectors.get(key)
                        if vec is None:
                            vec = vectors[key] = np.zeros(2**n_part, dtype=complex)
                            click_weight[key] = a_w
                        vec[idx] += val

    rho = np.zeros((2**n_part, 2**n_part), dtype=complex)
    for key, vec in vectors.items():
        rho += click_weight[key] * np.outer(vec, vec.conj())
    prob = float(np.trace(rho).real)
    if prob < 1e-15:
        raise NullOutcomeError(prob, "conditioning event never occurs")
    return prob, DensityMatrix.from_operator(rho)


# --- coincidence acceptance and contamination -----------------------------


def _accept_probability(occs: np.ndarray, det: DetectorConfig, order: int) -> np.ndarray:
    """Acceptance probability of a ``order``-fold coincidence for each occupation row.

    Alice needs exactly one firing detector at ``order/2`` of her stations
    (any choice of stations) and silence at the rest; the partner side needs
    exactly one surviving photon at ``order/2`` stations and none elsewhere.
    """
    half = order // 2
    eta, dark = det.efficiency, det.dark_count_prob
    fire = fire_probability(occs, eta[None, :], dark[None, :])
    survive_none = (1 - eta[None, :]) ** occs
    survive_one = occs * eta[None, :] * (1 - eta[None, :]) ** np.maximum(occs - 1, 0)

    alice_single, alice_silent = [], []
    for i in range(3):
        fh, fv_ = fire[:, 2 * i], fire[:, 2 * i + 1]
        alice_single.append(fh * (1 - fv_) + fv_ * (1 - fh))
        alice_silent.append((1 - fh) * (1 - fv_))
    partner_single, partner_empty = [], []
    for i in range(3, 6):
        h, v = 2 * i, 2 * i + 1
        partner_single.append(survive_one[:, h] * survive_none[:, v] + survive_none[:, h] * survive_one[:, v])
        partner_empty.append(survive_none[:, h] * survive_none[:, v])

    def side(single, silent):
        total = np.zeros(occs.shape[0])
        for chosen in product((0, 1), repeat=3):
            if sum(chosen) != half:
                continue
            term = np.ones(occs.shape[0])
            for i, c in enumerate(chosen):
                term = term * (single[i] if c else silent[i])
            total += term
        return total

    return side(alice_single, alice_silent) * side(partner_single, partner_empty)


def coincidence_by_order(cfg: PdcConfig, det: Optional[DetectorConfig] = None, coincidence_order: int = 6,
                         setting: Optional[AnalysisSetting] = None, splittings=None) -> Dict[int, float]:
    """Accepted coincidence probability contributed by each emission order."""
    if coincidence_order not in (2, 4, 6):
        raise ValueError("coincidence order must be 2, 4 or 6")
    det = DetectorConfig() if det is None else det
    out = {}
    for p in range(cfg.p_max + 1):
        fv = exit_state(cfg, splittings=splittings, orders=[p])
        if setting is not None:
            fv = apply_analysis(fv, setting)
        occs, weights = _detector_weights(fv)
        out[p] = float(weights @ _accept_probability(occs, det, coincidence_order))
    return out


def contamination_fraction(cfg: PdcConfig, det: Optional[DetectorConfig] = None, coincidence_order: int = 6,
                           setting: Optional[AnalysisSetting] = None, splittings=None) -> float:
    """Fraction of accepted coincidences coming from more than ``order/2`` pairs."""
    if cfg.p_max < coincidence_order // 2 + 1:
        raise ValueError("p_max must exceed the coincidence order's pair count")
    by_order = coincidence_by_order(cfg, det, coincidence_order, setting, splittings)
    total = sum(by_order.values())
    if total <= 0:
        raise NullOutcomeError(total, "no accepted coincidences")
    return sum(v for p, v in by_order.items() if p > coincidence_order // 2) / total


def coincidence_rate(cfg: PdcConfig, det: Optional[DetectorConfig] = None, coincidence_order: int = 6,
                     setting: Optional[AnalysisSetting] = None, splittings=None) -> float:
    return float(sum(coincidence_by_order(cfg, det, coincidence_order, setting, splittings).values()))
