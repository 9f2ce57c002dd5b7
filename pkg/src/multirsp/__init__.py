"""Remote state preparation over multiqubit rotationally invariant singlets.

Exact state-vector protocols live in :mod:`multirsp.protocols`; the photonic
source, splitter and detector model lives in :mod:`multirsp.photonics`.
"""

from .protocols import (
    ProtocolKind,
    ProtocolSpec,
    RspOutcome,
    alice_projector_set,
    doubled_success_probability,
    run_protocol,
    success_probability,
    target_state,
)
from .qstate import DensityMatrix, NullOutcomeError, PureState, fidelity, partial_trace
from .singlets import BasisPair, decompose_singlet, make_bell_pair, make_ghz, make_singlet, make_w3

__version__ = "0.1.0"

__all__ = [
    "BasisPair",
    "DensityMatrix",
    "NullOutcomeError",
    "ProtocolKind",
    "ProtocolSpec",
    "PureState",
    "RspOutcome",
    "alice_projector_set",
    "decompose_singlet",
    "doubled_success_probability",
    "fidelity",
    "make_bell_pair",
    "make_ghz",
    "make_singlet",
    "make_w3",
    "partial_trace",
    "run_protocol",
    "success_probability",
    "target_state",
]
