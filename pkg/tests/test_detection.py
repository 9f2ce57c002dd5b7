import numpy as np
import pytest

from multirsp.photonics.apparatus import (
    AnalysisSetting,
    PdcConfig,
    exit_state,
    k_from_tanh2,
    order_state,
    postselect_one_photon_per_mode,
)
from multirsp.photonics.detection import (
    ClickPattern,
    DetectorConfig,
    click_distribution,
    coincidence_by_order,
    coincidence_rate,
    conditional_click_distribution,
    conditional_partner_state,
    contamination_fraction,
    fire_probability,
    mask_string,
    one_click_per_station,
    pattern_from_stations,
    sample_clicks,
    station_clicks,
)
from multirsp.photonics.fock import EXIT_STATIONS, FockVector
from multirsp.qstate import NullOutcomeError, PureState, fidelity

SETTING = AnalysisSetting.from_bases({"a1": "D", "a2": "H", "a3": "R", "b1": "A", "b2": "L", "b3": "V"})


@pytest.fixture(scope="module")
def six_fold():
    fv = exit_state(PdcConfig(p_max=3))
    dist = click_distribution(fv, SETTING)
    return fv, dist, conditional_click_distribution(dist)


def born_probabilities():
    _, state = postselect_one_photon_per_mode(order_state(3), EXIT_STATIONS)
    vec = state.amplitudes.reshape((2,) * 6)
    for q, s in enumerate(EXIT_STATIONS):
        vec = np.moveaxis(np.tensordot(SETTING.get(s), vec, axes=([1], [q])), 0, q)
    probs = np.abs(vec.reshape(-1)) ** 2
    out = {}
    for idx, p in enumerate(probs):
        bits = format(idx, "06b")
        mask = "".join("01" if b == "1" else "10" for b in bits)
        out[int(mask, 2)] = p
    return out


def test_click_probabilities_sum_to_captured_norm(six_fold):
    fv, dist, _ = six_fold
    assert sum(dist.values()) == pytest.approx(fv.norm_squared(), abs=1e-12)


def test_six_fold_statistics_match_born_rule(six_fold):
    _, _, cond = six_fold
    born = born_probabilities()
    assert set(cond) <= set(born)
    worst = max(abs(cond.get(m, 0.0) - p) for m, p in born.items())
    assert worst < 1e-10


def test_monte_carlo_agrees_with_enumeration(six_fold):
    _, _, cond = six_fold
    shots = 100_000
    counts = sample_clicks(cond, shots, seed=11)
    for mask, p in cond.items():
        if p <= 1e-3:
            continue
        sigma = np.sqrt(p * (1 - p) / shots)
        assert abs(counts[mask] / shots - p) <= 3 * sigma, mask_string(mask)


def test_sampling_is_seeded(six_fold):
    _, _, cond = six_fold
    assert sample_clicks(cond, 500, 4) == sample_clicks(cond, 500, 4)
    with pytest.raises(ValueError):
        sample_clicks(cond, 0, 4)


def test_fire_probability():
    assert fire_probability(0, 0.5) == 0
    assert fire_probability(2, 0.5) == pytest.approx(0.75)
    assert fire_probability(0, 0.5, 0.01) == pytest.approx(0.01)


def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(0.0)
    with pytest.raises(ValueError):
        DetectorConfig(1.0, 0.5)
    det = DetectorConfig([0.5] * 12)
    assert det.eta("b3", "V") == 0.5


def test_click_pattern_roundtrip():
    pat = pattern_from_stations(station_clicks("H_V"))
    assert str(pat) == "100001000000"
    assert ClickPattern.from_mask(pat.mask) == pat
    assert pat.station("a3") == (False, True)
    with pytest.raises(ValueError):
        station_clicks("HX_")


def test_one_click_per_station():
    assert one_click_per_station(int("101010101010", 2))
    assert not one_click_per_station(int("111010101010", 2))
    assert one_click_per_station(int("100000100000", 2), ("a1", "b1"))


def test_partner_state_lossless_matches_projection():
    fv = exit_state(PdcConfig(p_max=2), orders=[1])
    prob, rho = conditional_partner_state(fv, "H__", partner_stations=("b1",))
    assert fidelity(rho, PureState.from_label("V")) == pytest.approx(1.0, abs=1e-12)
    assert prob > 0


def test_partner_state_null_event():
    fv = FockVector.vacuum()
    with pytest.raises(NullOutcomeError):
        conditional_partner_state(fv, "H__", partner_stations=("b1",))


def test_partner_state_rejects_alice_double_click():
    fv = exit_state(PdcConfig(p_max=1))
    with pytest.raises(ValueError):
        conditional_partner_state(fv, ClickPattern.from_mask(int("110000000000", 2)))


def test_contamination_zero_without_loss():
    assert contamination_fraction(PdcConfig(p_max=4)) == pytest.approx(0.0, abs=1e-15)


def test_contamination_increases_with_pump():
    det = DetectorConfig(0.15)
    values = [contamination_fraction(PdcConfig(K=k_from_tanh2(t), p_max=4), det)
              for t in (0.02, 0.05, 0.1, 0.2)]
    assert all(0 < a < b for a, b in zip(values, values[1:]))


def test_contamination_needs_extra_order():
    with pytest.raises(ValueError):
        contamination_fraction(PdcConfig(p_max=3))


def test_coincidence_by_order_lossless_is_third_order_only():
    by_order = coincidence_by_order(PdcConfig(p_max=4))
    assert by_order[4] == 0 and by_order[2] == 0 and by_order[3] > 0
    with pytest.raises(ValueError):
        coincidence_by_order(PdcConfig(p_max=4), coincidence_order=5)


def test_six_fold_rate_scales_as_tanh_to_the_sixth():
    # leading order: P(3 pairs) = 4 tanh^6 / cosh^4, times a K-independent acceptance
    ts = np.geomspace(1e-4, 1e-3, 5)
    ratios = [coincidence_rate(PdcConfig(K=k_from_tanh2(t), p_max=4), DetectorConfig(0.5)) / t**3
              for t in ts]
    assert max(ratios) / min(ratios) - 1 < 0.05
