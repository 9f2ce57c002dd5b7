import numpy as np
import pytest

from multirsp.photonics.apparatus import PdcConfig, k_from_tanh2
from multirsp.photonics.detection import DetectorConfig
from multirsp.photonics.scenario import run_photonic
from multirsp.protocols import ProtocolKind, ProtocolSpec, run_protocol
from multirsp.singlets import BasisPair, make_singlet

CASES = [
    ProtocolSpec(ProtocolKind.SINGLE_QUBIT, basis=BasisPair.from_labels("LR")),
    ProtocolSpec(ProtocolKind.PRODUCT_COPIES, k=4, basis=BasisPair.from_labels("DA")),
    ProtocolSpec(ProtocolKind.BELL),
    ProtocolSpec(ProtocolKind.NONMAX, alpha=0.5),
    ProtocolSpec(ProtocolKind.W),
    ProtocolSpec(ProtocolKind.WBAR),
    ProtocolSpec(ProtocolKind.GHZ),
    ProtocolSpec(ProtocolKind.TRACE_MIXTURE, traced_count=1),
]


@pytest.mark.parametrize("spec", CASES, ids=lambda s: f"{s.kind.value}{s.k}")
def test_lossless_pipeline_reproduces_ideal_protocol(spec):
    run = run_photonic(spec, PdcConfig(p_max=spec.n_alice + 1))
    ideal = {o.alice_outcome_label: o for o in run_protocol(make_singlet(spec.k), spec)}
    for label, p in run.renormalized().items():
        assert p == pytest.approx(ideal[label].probability, abs=1e-10)
    for o in run.outcomes:
        ref = ideal[o.label].partner_state
        if ref is None:
            continue
        ref_rho = ref.to_density().entries if hasattr(ref, "to_density") else ref.entries
        np.testing.assert_allclose(o.partner.entries, ref_rho, atol=1e-9)
    if spec.kind is not ProtocolKind.TRACE_MIXTURE:
        assert run.prepared_fidelity() == pytest.approx(1.0, abs=1e-9)


def test_product_copies_six_with_diagonal_analysis():
    spec = ProtocolSpec(ProtocolKind.PRODUCT_COPIES, basis=BasisPair.from_labels("DA"))
    run = run_photonic(spec, PdcConfig(p_max=3))
    assert run.success_fraction == pytest.approx(0.25, abs=1e-12)
    assert run.prepared_fidelity() == pytest.approx(1.0, abs=1e-9)


def test_loss_degrades_fidelity():
    spec = ProtocolSpec(ProtocolKind.W)
    run = run_photonic(spec, PdcConfig(p_max=4), DetectorConfig(0.15))
    assert run.prepared_fidelity() < 1


def test_fidelity_decreases_with_pump():
    spec = ProtocolSpec(ProtocolKind.PRODUCT_COPIES, k=2)
    fids = [run_photonic(spec, PdcConfig(K=k_from_tanh2(t), p_max=3), DetectorConfig(0.15)).prepared_fidelity()
            for t in (0.02, 0.05, 0.1)]
    assert fids[0] > fids[1] > fids[2]


def test_p_max_too_small():
    with pytest.raises(ValueError):
        run_photonic(ProtocolSpec(ProtocolKind.W), PdcConfig(p_max=2))
