"""Fock-space model of the down-conversion source, splitter network and detectors."""

from .apparatus import (
    AnalysisSetting,
    PdcConfig,
    apply_analysis,
    build_fanout_network,
    build_pdc_state,
    exit_state,
    k_from_tanh2,
    order_state,
    postselect_one_photon_per_mode,
    waveplate_unitary,
)
from .detection import (
    ClickPattern,
    DetectorConfig,
    click_distribution,
    conditional_partner_state,
    contamination_fraction,
    sample_clicks,
)
from .fock import FockVector, apply_beam_splitter
from .scenario import run_photonic

__all__ = [
    "AnalysisSetting",
    "ClickPattern",
    "DetectorConfig",
    "FockVector",
    "PdcConfig",
    "apply_analysis",
    "apply_beam_splitter",
    "build_fanout_network",
    "build_pdc_state",
    "click_distribution",
    "conditional_partner_state",
    "contamination_fraction",
    "exit_state",
    "k_from_tanh2",
    "order_state",
    "postselect_one_photon_per_mode",
    "run_photonic",
    "sample_clicks",
    "waveplate_unitary",
]
