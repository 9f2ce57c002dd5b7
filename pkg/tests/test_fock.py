import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multirsp.photonics.fock import (
    MODES,
    FockVector,
    apply_beam_splitter,
    apply_polarization_unitary,
    check_spatial,
)
from multirsp.qstate import random_special_unitary


def two_photons(spatial="a", pol="H"):
    return FockVector.from_photons({(spatial, pol): 2}, amplitude=1.0)


def test_two_photon_splitting_amplitudes():
    # (t a1^dag + r a2^dag)^2 / sqrt2 |0> with t = r = 1/sqrt2
    out = apply_beam_splitter(two_photons(), "a", "a1", "a2", 1 / np.sqrt(2))
    assert out.amplitude({("a1", "H"): 2}) == pytest.approx(0.5)
    assert out.amplitude({("a1", "H"): 1, ("a2", "H"): 1}) == pytest.approx(1 / np.sqrt(2))
    assert out.amplitude({("a2", "H"): 2}) == pytest.approx(0.5)
    assert len(out) == 3


def test_splitter_is_polarization_independent():
    fv = FockVector.from_photons({("a", "V"): 1})
    out = apply_beam_splitter(fv, "a", "a1", "a2", 0.8)
    assert out.amplitude({("a1", "V"): 1}) == pytest.approx(0.8)
    assert out.amplitude({("a2", "V"): 1}) == pytest.approx(0.6)


def test_splitter_validation():
    with pytest.raises(ValueError):
        apply_beam_splitter(two_photons(), "a", "a1", "a1", 0.5)
    with pytest.raises(ValueError):
        apply_beam_splitter(two_photons(), "a", "a1", "a2", 0.0)
    with pytest.raises(ValueError):
        apply_beam_splitter(two_photons(), "a", "a1", "c9", 0.5)
    with pytest.raises(ValueError):
        check_spatial("z")


def test_photon_cap_enforced():
    with pytest.raises(ValueError):
        FockVector.from_photons({("a", "H"): 3}, photon_cap=2)


def test_norm_above_one_rejected():
    occ = (0,) * len(MODES)
    with pytest.raises(ValueError):
        FockVector({occ: 1.5})


@settings(max_examples=30, deadline=None)
@given(
    st.integers(0, 3), st.integers(0, 3), st.floats(0.05, 0.95), st.integers(0, 1000)
)
def test_linear_optics_preserves_norm_and_number(nh, nv, t, seed):
    if nh + nv == 0:
        return
    fv = FockVector.from_photons({("a", "H"): nh, ("a", "V"): nv})
    out = apply_beam_splitter(fv, "a", "a1", "a2", t)
    out = apply_polarization_unitary(out, "a1", random_special_unitary(seed))
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)
    assert out.photon_numbers() == {nh + nv}


def test_polarization_rotation_of_single_photon():
    fv = FockVector.from_photons({("a1", "H"): 1})
    u = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    out = apply_polarization_unitary(fv, "a1", u)
    assert out.amplitude({("a1", "H"): 1}) == pytest.approx(1 / np.sqrt(2))
    assert out.amplitude({("a1", "V"): 1}) == pytest.approx(1 / np.sqrt(2))


def test_hong_ou_mandel_like_bunching_in_polarization():
    # |1H,1V> through a 45 degree rotation: the |1,1> amplitude cancels
    fv = FockVector.from_photons({("a1", "H"): 1, ("a1", "V"): 1})
    u = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    out = apply_polarization_unitary(fv, "a1", u)
    assert abs(out.amplitude({("a1", "H"): 1, ("a1", "V"): 1})) < 1e-15
    assert abs(out.amplitude({("a1", "H"): 2})) ** 2 == pytest.approx(0.5)


def test_add_and_restrict():
    a = FockVector.from_photons({("a", "H"): 1}, amplitude=0.6)
    b = FockVector.from_photons({("a", "H"): 2}, amplitude=0.8)
    s = a + b
    assert s.photon_numbers() == {1, 2}
    r = s.restrict(2)
    assert r.norm_squared() == pytest.approx(0.64)
    assert r.deficit == pytest.approx(0.36)
