"""Report builders behind the command-line subcommands.

Every ``cmd_*`` function returns a plain dict with a ``rows`` list of flat
records and a ``columns`` list giving the fixed CSV column order.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, replace
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, ScenarioConfig
from .photonics.apparatus import AnalysisSetting, PdcConfig, exit_state, k_from_tanh2
from .photonics.detection import (
    DetectorConfig,
    click_distribution,
    coincidence_rate,
    conditional_click_distribution,
    contamination_fraction,
    mask_string,
    sample_clicks,
)
from .photonics.fock import DETECTORS
from .photonics.scenario import alice_setting, run_photonic, stations_for
from .protocols import (
    ProtocolKind,
    ProtocolSpec,
    doubled_success_probability,
    ghz_basis_report,
    mixture_claims_report,
    run_protocol,
    success_probability,
    target_state,
)
from .qstate import DensityMatrix, NullOutcomeError, PureState, fidelity, random_special_unitary
from .singlets import BasisPair, decompose_singlet, make_singlet

TOMOGRAPHY_BASES = ("HV", "DA", "LR")
DETECTOR_ORDER = ",".join(s + p for s, p in DETECTORS)


@dataclass(frozen=True)
class ReportRow:
    """One probability in a report; ``std_error`` is 0 for exact values."""

    label: str
    probability: float
    std_error: float = 0.0
    fidelity: Optional[float] = None

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability!r} outside [0, 1]")
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")

    def to_dict(self) -> dict:
        return {"label": self.label, "probability": self.probability,
                "std_error": self.std_error, "fidelity": self.fidelity}


def binomial_estimate(count: int, shots: int):
    p = count / shots
    return p, float(np.sqrt(p * (1 - p) / shots))


def _state_dict(state) -> dict:
    if isinstance(state, PureState):
        return {"amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes]}
    return {"density": [[[float(z.real), float(z.imag)] for z in row] for row in state.entries]}


# --- Table 1 --------------------------------------------------------------

_TABLE_ROWS = (
    ("Psi_2^-", "psi", ProtocolKind.SINGLE_QUBIT, 2, 1 / 2),
    ("Psi_4^-", "psi psi", ProtocolKind.PRODUCT_COPIES, 4, 1 / 3),
    ("Psi_4^-", "Psi_2^+", ProtocolKind.BELL, 4, 1 / 3),
    ("Psi_6^-", "psi psi psi", ProtocolKind.PRODUCT_COPIES, 6, 1 / 4),
    ("Psi_6^-", "W / Wbar", ProtocolKind.W, 6, 1 / 4),
    ("Psi_6^-", "GHZ", ProtocolKind.GHZ, 6, 1 / 4),
)
TABLE1_COLUMNS = ("shared_state", "qubits", "prepared_state", "probability", "published",
                  "doubled_probability", "extended_probability", "wbar_probability")


def cmd_table1(basis: BasisPair = BasisPair.from_labels("HV"),
               equatorial_basis: BasisPair = BasisPair.from_labels("DA")) -> dict:
    """Success probabilities on ideal singlets.

    ``probability`` counts only the designated outcomes. The doubled column
    repeats the protocol in ``equatorial_basis`` and adds every rejected
    outcome that a sigma_z on each partner qubit turns into the target. For
    GHZ ``extended_probability`` also accepts Pauli-correctable outcomes.
    """
    rows = []
    for shared, prepared, kind, k, published in _TABLE_ROWS:
        spec = ProtocolSpec(kind, k, basis=basis)
        row = {
            "shared_state": shared,
            "qubits": k // 2,
            "prepared_state": prepared,
            "probability": success_probability(spec),
            "published": published,
            "doubled_probability": doubled_success_probability(replace(spec, basis=equatorial_basis)),
            "extended_probability": None,
            "wbar_probability": None,
        }
        if kind is ProtocolKind.GHZ:
            row["extended_probability"] = success_probability(replace(spec, extended=True))
        if kind is ProtocolKind.W:
            row["wbar_probability"] = success_probability(replace(spec, kind=ProtocolKind.WBAR))
        rows.append(row)
    ghz_spec = ProtocolSpec(ProtocolKind.GHZ, basis=basis)
    accepted = [o for o in run_protocol(make_singlet(6), ghz_spec) if o.accepted][0]
    findings = {
        "ghz_single_outcome": {
            "probability": accepted.probability,
            "fidelity_with_target": accepted.fidelity,
            "published": 1 / 4,
            "agrees_with_published": abs(accepted.probability - 0.25) < 1e-12,
        },
        "ghz_basis": ghz_basis_report(accepted.partner_state, basis),
    }
    return {"command": "table1", "columns": list(TABLE1_COLUMNS), "rows": rows,
            "findings": findings}


# --- tomography -----------------------------------------------------------

TOMOGRAPHY_COLUMNS = ("basis", "label", "probability", "std_error", "fidelity")


def _basis_probabilities(state, basis: BasisPair) -> dict:
    rho = state.to_density() if isinstance(state, PureState) else state
    n = rho.n_qubits
    out = {}
    for bits in product("01", repeat=n):
        bits = "".join(bits)
        out[bits] = max(0.0, rho.expectation(basis.ket(bits)))
    return out


def cmd_tomography(state_or_scenario, bases: Sequence[str] = TOMOGRAPHY_BASES,
                   shots: int = 0, seed: int = 0) -> dict:
    """Outcome probabilities of the prepared state in each analysis basis.

    Every partner qubit is analysed in the same basis. Labels use the basis
    letters, e.g. ``"DDA"``. With ``shots > 0`` each basis gets an independent
    multinomial sample and the rows carry binomial standard errors.
    """
    if isinstance(state_or_scenario, ScenarioConfig):
        state, fid = prepared_state(state_or_scenario)
    else:
        state, fid = state_or_scenario, None
    if not isinstance(state, (PureState, DensityMatrix)):
        raise TypeError("tomography needs a PureState, DensityMatrix or ScenarioConfig")
    rng = np.random.default_rng(seed)
    rows, sums = [], {}
    for name in bases:
        bp = BasisPair.from_labels(name)
        letters = name
        probs = _basis_probabilities(state, bp)
        labels = list(probs)
        p = np.array([probs[b] for b in labels])
        p = p / p.sum()
        if shots:
            counts = rng.multinomial(int(shots), p)
            est = [binomial_estimate(int(c), int(shots)) for c in counts]
        else:
            est = [(float(x), 0.0) for x in p]
        for bits, (prob, se) in zip(labels, est):
            label = "".join(letters[int(b)] for b in bits)
            rows.append({"basis": name, "label": label, "probability": prob, "std_error": se,
                         "fidelity": fid})
        sums[name] = float(sum(e[0] for e in est))
    return {"command": "tomography", "columns": list(TOMOGRAPHY_COLUMNS), "rows": rows,
            "basis_sums": sums, "shots": int(shots), "seed": int(seed)}


# --- run ------------------------------------------------------------------

RUN_COLUMNS = ("label", "probability", "std_error", "accepted", "fidelity")
CLICK_COLUMNS = ("mask", "count", "probability")


def _photonic_run(config: ScenarioConfig):
    app = config.apparatus
    spec = config.protocol
    pdc = app.pdc
    if pdc.p_max < spec.n_alice:
        raise ConfigError(f"p_max={pdc.p_max} cannot produce the {spec.n_alice} pairs this protocol needs")
    return run_photonic(spec, pdc, app.detectors, app.splittings, app.photon_cap)


def prepared_state(config: ScenarioConfig):
    """State left with the partners after the accepted outcomes, and its target fidelity."""
    spec = config.protocol
    if config.mode == "ideal":
        outcomes = [o for o in run_protocol(make_singlet(spec.k), spec)
                    if o.accepted and o.partner_state is not None]
        weight = sum(o.probability for o in outcomes)
        if weight < 1e-15:
            raise NullOutcomeError(weight, "accepted outcomes never occur")
        if len(outcomes) == 1 and isinstance(outcomes[0].partner_state, PureState):
            state = outcomes[0].partner_state
        else:
            rho = sum(o.probability * _as_density(o.partner_state).entries for o in outcomes) / weight
            state = DensityMatrix.from_operator(rho)
    else:
        state = _photonic_run(config).prepared_state()
    target = target_state(spec)
    return state, (None if target is None else fidelity(state, target))


def _as_density(state) -> DensityMatrix:
    return state.to_density() if isinstance(state, PureState) else state


def cmd_run(config: ScenarioConfig) -> dict:
    """Exact or sampled run of one scenario.

    Outcome probabilities are conditioned on the post-selected coincidence
    (for ideal singlets they are the plain Born probabilities). With shots,
    ``shots`` post-selected events are drawn and the prepared-state fidelity
    is estimated from one target-projection trial per accepted event.
    """
    spec = config.protocol
    shots, rng = int(config.shots), np.random.default_rng(config.seed)
    report = {"command": "run", "mode": config.mode, "protocol": spec.kind.value, "k": spec.k,
              "shots": shots, "seed": config.seed, "columns": list(RUN_COLUMNS)}
    if config.mode == "ideal":
        outs = run_protocol(make_singlet(spec.k), spec)
        labels = [o.alice_outcome_label for o in outs]
        probs = np.array([o.probability for o in outs])
        accepted = [o.accepted for o in outs]
        fids = [o.fidelity for o in outs]
        report["partner_states"] = {o.alice_outcome_label: _state_dict(o.partner_state)
                                    for o in outs if o.partner_state is not None}
    else:
        run = _photonic_run(config)
        if run.coincidence_probability < 1e-15:
            raise NullOutcomeError(run.coincidence_probability, "no post-selected coincidences")
        ren = run.renormalized()
        labels = [o.label for o in run.outcomes]
        probs = np.array([ren[o.label] for o in run.outcomes])
        accepted = [o.accepted for o in run.outcomes]
        fids = [o.fidelity for o in run.outcomes]
        report["coincidence_probability_per_pulse"] = run.coincidence_probability
        report["apparatus"] = config.apparatus.to_dict()
        report["partner_states"] = {o.label: _state_dict(o.partner) for o in run.outcomes
                                    if o.partner is not None}
    success = float(sum(p for p, a in zip(probs, accepted) if a))
    if success < 1e-15:
        raise NullOutcomeError(success, "the accepted outcomes have zero probability")
    state, prep_fid = prepared_state(config)
    report["prepared_state"] = _state_dict(state)

    if shots:
        counts = rng.multinomial(shots, probs / probs.sum())
        est = [binomial_estimate(int(c), shots) for c in counts]
        n_acc = int(sum(c for c, a in zip(counts, accepted) if a))
        succ = binomial_estimate(n_acc, shots)
        fid_est = None
        if prep_fid is not None and n_acc:
            hits = sum(rng.binomial(int(c), min(1.0, max(0.0, f)))
                       for c, a, f in zip(counts, accepted, fids) if a and c and f is not None)
            fid_est = binomial_estimate(int(hits), n_acc)
    else:
        est = [(float(p), 0.0) for p in probs]
        succ = (success, 0.0)
        fid_est = None if prep_fid is None else (prep_fid, 0.0)

    report["rows"] = [
        {"label": lab, "probability": p, "std_error": se, "accepted": a, "fidelity": f}
        for lab, (p, se), a, f in zip(labels, est, accepted, fids)
    ]
    report["success_probability"] = {"value": succ[0], "std_error": succ[1]}
    report["prepared_fidelity"] = (None if fid_est is None
                                   else {"value": fid_est[0], "std_error": fid_est[1]})
    report["exact_prepared_fidelity"] = prep_fid
    if config.mode == "photonic":
        report["clicks"] = click_table(config)
    return report


def click_table(config: ScenarioConfig) -> dict:
    """Click patterns of the scenario's coincidence, exact or sampled.

    Alice's stations use the protocol's analysis; apparatus ``analysis``
    angles set the partner stations. Probabilities are conditioned on one
    click at each used station and silence elsewhere.
    """
    spec, app = config.protocol, config.apparatus
    alice, partners = stations_for(spec)
    units = dict(app.analysis.restricted(partners).unitaries)
    units.update(alice_setting(spec).unitaries)
    fv = exit_state(app.pdc, app.splittings, app.photon_cap)
    dist = click_distribution(fv, AnalysisSetting(units), app.detectors)
    cond = conditional_click_distribution(dist, alice + partners)
    rows = []
    if config.shots:
        counts = sample_clicks(cond, config.shots, config.seed)
        for m in sorted(cond):
            rows.append({"mask": mask_string(m), "count": counts.get(m, 0),
                         "probability": counts.get(m, 0) / config.shots})
    else:
        rows = [{"mask": mask_string(m), "count": 0, "probability": cond[m]} for m in sorted(cond)]
    return {"columns": list(CLICK_COLUMNS), "detector_order": DETECTOR_ORDER, "rows": rows}


# --- sweep ----------------------------------------------------------------

SWEEP_COLUMNS = ("value", "rate_proxy", "contamination", "mean_fidelity")
SWEEP_PARAMS = ("K", "tanh2K", "eta")


def cmd_sweep(param: str, values: Sequence[float], config: ScenarioConfig) -> dict:
    """Coincidence rate, contamination and prepared fidelity across a parameter range.

    ``param`` is ``K``, ``tanh2K`` or ``eta``; the rest comes from the photonic
    ``config``. ``p_max`` is raised when needed so that one extra pair order is
    always present for the contamination estimate.
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep range is empty")
    if config.mode != "photonic" or config.apparatus is None:
        raise ConfigError("sweeps need a photonic scenario")
    spec, app = config.protocol, config.apparatus
    order = spec.k
    rows = []
    for v in values:
        pdc, det = app.pdc, app.detectors
        try:
            if param == "K":
                pdc = replace(pdc, K=v)
            elif param == "tanh2K":
                pdc = replace(pdc, K=k_from_tanh2(v))
            else:
                det = DetectorConfig(v, det.dark_count_prob)
        except ValueError as exc:
            raise ConfigError(f"bad {param} value {v!r}: {exc}") from exc
        pdc = replace(pdc, p_max=max(pdc.p_max, spec.n_alice + 1))
        run = run_photonic(spec, pdc, det, app.splittings, app.photon_cap)
        rows.append({
            "value": v,
            "rate_proxy": coincidence_rate(pdc, det, order, splittings=app.splittings),
            "contamination": contamination_fraction(pdc, det, order, splittings=app.splittings),
            "mean_fidelity": run.prepared_fidelity(),
        })
    return {"command": "sweep", "param": param, "protocol": spec.kind.value,
            "columns": list(SWEEP_COLUMNS), "rows": rows}


# --- decompose ------------------------------------------------------------


def cmd_decompose(k: int = 6, basis: BasisPair = BasisPair.from_labels("HV")) -> dict:
    report = decompose_singlet(k, basis)
    out = report.to_dict()
    out["command"] = "decompose"
    out["reconstruction_fidelity"] = report.reconstruction_fidelity()
    out["columns"] = ["alice_bits", "coefficient_re", "coefficient_im", "partner"]
    out["rows"] = [
        {"alice_bits": " ".join(b.alice_bits), "coefficient_re": float(np.real(b.coefficient)),
         "coefficient_im": float(np.imag(b.coefficient)),
         "partner": json.dumps([[float(z.real), float(z.imag)] for z in b.partner.amplitudes])}
        for b in report.branches
    ]
    if k == 6:
        out["mixture_claims"] = mixture_claims_report(basis)
    return out


# --- selftest -------------------------------------------------------------

SELFTEST_COLUMNS = ("check", "passed", "detail")


def cmd_selftest(shots: int = 20000, seed: int = 0) -> dict:
    """Quick consistency checks, including sampled-vs-exact agreement within 4 sigma."""
    t0 = time.perf_counter()
    rows = []

    def check(name, ok, detail=""):
        rows.append({"check": name, "passed": bool(ok), "detail": str(detail)})

    table = cmd_table1()
    probs = [r["probability"] for r in table["rows"]]
    expected = [1 / 2, 1 / 3, 1 / 3, 1 / 4, 1 / 4, 1 / 16]
    check("table1", np.allclose(probs, expected, atol=1e-12, rtol=0), probs)

    worst = 0.0
    for i in range(10):
        u = random_special_unitary(seed + i)
        for k in (2, 4, 6):
            s = make_singlet(k)
            vec = s.amplitudes.reshape((2,) * k)
            for q in range(k):
                vec = np.moveaxis(np.tensordot(u, vec, axes=([1], [q])), 0, q)
            worst = max(worst, float(np.linalg.norm(vec.reshape(-1) - s.amplitudes)))
    check("singlet_invariance", worst < 1e-10, worst)

    dec = decompose_singlet(6)
    check("decomposition", abs(dec.reconstruction_fidelity() - 1) < 1e-10, dec.reconstruction_fidelity())

    spec = ProtocolSpec(ProtocolKind.W)
    exact = cmd_run(ScenarioConfig("ideal", spec))
    sampled = cmd_run(ScenarioConfig("ideal", spec, shots=shots, seed=seed))
    bad = []
    for e, s in zip(exact["rows"], sampled["rows"]):
        sigma = np.sqrt(e["probability"] * (1 - e["probability"]) / shots)
        if abs(s["probability"] - e["probability"]) > 4 * max(sigma, 1e-12):
            bad.append(e["label"])
    check("sampled_within_4_sigma", not bad, bad or "all outcomes")

    cfg = PdcConfig(p_max=3)
    run = run_photonic(ProtocolSpec(ProtocolKind.PRODUCT_COPIES, 6), cfg)
    check("photonic_ideal_limit", abs(run.prepared_fidelity() - 1) < 1e-9, run.prepared_fidelity())

    passed = all(r["passed"] for r in rows)
    return {"command": "selftest", "columns": list(SELFTEST_COLUMNS), "rows": rows,
            "passed": passed, "seconds": time.perf_counter() - t0}


# --- serialization --------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True)


def to_csv(report: dict, table: Optional[str] = None) -> str:
    """CSV of ``report['rows']`` (or of a nested table such as ``clicks``)."""
    source = report if table is None else report[table]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=source["columns"], extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in source["rows"]:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()
