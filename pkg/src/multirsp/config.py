"""Scenario and apparatus configuration documents (JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .photonics.apparatus import AnalysisSetting, PdcConfig, k_from_tanh2
from .photonics.detection import DetectorConfig
from .protocols import ProtocolKind, ProtocolSpec
from .qstate import PureState
from .singlets import BasisPair


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class ApparatusConfig:
    pdc: PdcConfig = field(default_factory=PdcConfig)
    photon_cap: Optional[int] = None
    splittings: Optional[tuple] = None
    detectors: DetectorConfig = field(default_factory=DetectorConfig)
    analysis_angles: dict = field(default_factory=dict)

    @property
    def analysis(self) -> AnalysisSetting:
        return AnalysisSetting.from_waveplates(self.analysis_angles)

    def to_dict(self) -> dict:
        eta = self.detectors.efficiency
        dark = self.detectors.dark_count_prob
        return {
            "K": self.pdc.K,
            "phi": self.pdc.phi,
            "p_max": self.pdc.p_max,
            "photon_cap": self.photon_cap if self.photon_cap is not None else 2 * self.pdc.p_max,
            "splittings": list(self.splittings) if self.splittings else None,
            "efficiency": float(eta[0]) if np.all(eta == eta[0]) else eta.tolist(),
            "dark_count_prob": float(dark[0]) if np.all(dark == dark[0]) else dark.tolist(),
            "analysis": {k: list(v) for k, v in self.analysis_angles.items()},
        }


def parse_apparatus(doc: dict) -> ApparatusConfig:
    if not isinstance(doc, dict):
        raise ConfigError("apparatus must be a JSON object")
    known = {"K", "tanh2K", "phi", "p_max", "photon_cap", "splittings", "efficiency",
             "dark_count_prob", "analysis"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown apparatus keys: {sorted(unknown)}")
    try:
        if "K" in doc and "tanh2K" in doc:
            raise ConfigError("give either K or tanh2K, not both")
        kw = {}
        if "K" in doc:
            kw["K"] = float(doc["K"])
        elif "tanh2K" in doc:
            kw["K"] = k_from_tanh2(float(doc["tanh2K"]))
        if "phi" in doc:
            kw["phi"] = float(doc["phi"])
        if "p_max" in doc:
            kw["p_max"] = int(doc["p_max"])
        pdc = PdcConfig(**kw)
        cap = doc.get("photon_cap")
        if cap is not None and int(cap) < 2 * pdc.p_max:
            raise ConfigError(f"photon_cap {cap} is below 2 * p_max")
        det = DetectorConfig(doc.get("efficiency", 1.0), doc.get("dark_count_prob", 0.0))
        angles = {}
        for station, pair in (doc.get("analysis") or {}).items():
            if len(pair) != 2:
                raise ConfigError(f"analysis for {station} needs [hwp_deg, qwp_deg]")
            angles[station] = (float(pair[0]), float(pair[1]))
        AnalysisSetting.from_waveplates(angles)
        spl = doc.get("splittings")
        return ApparatusConfig(pdc, None if cap is None else int(cap),
                               None if spl is None else tuple(float(t) for t in spl), det, angles)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_basis(value) -> BasisPair:
    if value is None:
        return BasisPair.from_labels("HV")
    if isinstance(value, str):
        if len(value) == 1:
            return BasisPair.from_psi(value)
        return BasisPair.from_labels(value)
    if isinstance(value, dict) and "psi" in value:
        re_im = np.asarray(value["psi"], dtype=float)
        psi = PureState.from_vector(re_im[:, 0] + 1j * re_im[:, 1])
        return BasisPair.from_psi(psi)
    raise ConfigError(f"cannot parse basis {value!r}")


def parse_protocol(doc: dict) -> ProtocolSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("protocol must be an object with a 'kind'")
    try:
        kind = ProtocolKind(doc["kind"])
    except ValueError:
        raise ConfigError(
            f"unknown protocol kind {doc['kind']!r}; choose from {[k.value for k in ProtocolKind]}"
        ) from None
    try:
        kw = {"kind": kind, "basis": parse_basis(doc.get("basis"))}
        for key, conv in (("k", int), ("theta", float), ("alpha", float), ("sign", int),
                          ("traced_count", int), ("extended", bool)):
            if doc.get(key) is not None:
                kw[key] = conv(doc[key])
        return ProtocolSpec(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    protocol: ProtocolSpec
    apparatus: Optional[ApparatusConfig] = None
    shots: int = 0
    seed: int = 0
    output: str = "json"
    out_path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in ("ideal", "photonic"):
            raise ConfigError(f"mode must be 'ideal' or 'photonic', got {self.mode!r}")
        if self.mode == "photonic" and self.apparatus is None:
            raise ConfigError("photonic mode requires an apparatus block")
        if self.shots < 0:
            raise ConfigError("shots must be >= 0")
        if self.output not in ("json", "csv"):
            raise ConfigError("output must be 'json' or 'csv'")


def parse_scenario(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    try:
        apparatus = parse_apparatus(doc["apparatus"]) if doc.get("apparatus") is not None else None
        return ScenarioConfig(
            mode=doc.get("mode", "ideal"),
            protocol=parse_protocol(doc.get("protocol", {})),
            apparatus=apparatus,
            shots=int(doc.get("shots", 0)),
            seed=int(doc.get("seed", 0)),
            output=doc.get("output", "json"),
            out_path=doc.get("out_path"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_scenario(doc)
