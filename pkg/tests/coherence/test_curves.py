import numpy as np
import pytest
from scipy import optimize

from dd_noise_spectroscopy.coherence import (
    CHI_MAX,
    CoherenceCurve,
    coherence_curve,
    spin_echo_curve,
    spin_spin_exact,
)
from dd_noise_spectroscopy.pulses import (
    InvalidSequenceError,
    SequenceFamily,
    filter_transform,
    make_sequence,
)
from dd_noise_spectroscopy.spectra import SpinBath


def test_white_noise_is_linear(white):
    """Test that ln W is exactly linear in t for white noise."""
    curve = coherence_curve(SequenceFamily.cpmg(0.5, 2), white, [2, 4, 8, 16])
    np.testing.assert_allclose(curve.t, [2.0, 4.0, 8.0, 16.0])
    np.testing.assert_allclose(curve.chi, white.s0 * curve.t / 2, rtol=1e-12)
    np.testing.assert_array_equal(curve.n, [2, 4, 8, 16])
    assert curve.protocol["sequence"]["kind"] == "cpmg"


def test_threaded_evaluation_keeps_order(lorentzian):
    family = SequenceFamily.cpmg(0.2, 2)
    serial = coherence_curve(family, lorentzian, [2, 6, 10, 30])
    threaded = coherence_curve(family, lorentzian, [2, 6, 10, 30], max_workers=4)
    np.testing.assert_array_equal(serial.chi, threaded.chi)
    assert np.all(np.diff(serial.chi) > 0)


def test_spin_bath_curve():
    """Test that spin baths go through the product formula."""
    bath = SpinBath(((1.0, 0.05), (2.0, 0.02)))
    family = SequenceFamily.cpmg(0.4, 2)
    curve = coherence_curve(family, bath, [2, 4])
    expected = spin_spin_exact(make_sequence(family.with_pulse_count(4)), bath)
    assert curve.W[1] == pytest.approx(expected, rel=1e-12)
    assert "spin_bath" in curve.protocol["noise"]


@pytest.mark.parametrize("n_list", [[], [4, 2], [0, 2], [2, 2]])
def test_invalid_pulse_counts(n_list, white):
    with pytest.raises(ValueError):
        coherence_curve(SequenceFamily.cpmg(0.5, 2), white, n_list)


def test_non_equidistant_family(white):
    with pytest.raises(InvalidSequenceError):
        coherence_curve(SequenceFamily.udd(1.0, 2), white, [2, 4])


def test_spin_echo_curve(white):
    curve = spin_echo_curve([0.5, 1.0, 2.0], white)
    np.testing.assert_allclose(curve.t, [1.0, 2.0, 4.0])
    np.testing.assert_allclose(curve.W, np.exp(-white.s0 * curve.t / 2))
    with pytest.raises(ValueError):
        spin_echo_curve([], white)


def test_curve_invariants():
    with pytest.raises(ValueError):
        CoherenceCurve(t=[1.0, 0.5], chi=[0.1, 0.2])
    with pytest.raises(ValueError):
        CoherenceCurve(t=[1.0, 2.0], chi=[0.1, -0.2])
    with pytest.raises(ValueError):
        CoherenceCurve(t=[1.0, 2.0], chi=[0.1])
    with pytest.raises(ValueError):
        CoherenceCurve(t=[1.0, 2.0], chi=[0.1, np.inf])
    with pytest.raises(ValueError):
        CoherenceCurve(t=[1.0, 2.0], chi=[0.1, np.nan])
    curve = CoherenceCurve(t=[1.0, 2.0], chi=[0.0, -1e-12])
    assert curve.chi[1] == 0.0
    assert not curve.at_floor.any()


def test_large_exponents_are_clipped():
    curve = CoherenceCurve(t=[1.0, 2.0], chi=[10.0, 5000.0])
    assert curve.chi[1] == CHI_MAX
    np.testing.assert_array_equal(curve.at_floor, [False, True])
    assert curve.W[1] > 0.0


def test_vanishing_spin_bath_coherence():
    """Test that an exact zero of W is stored at the exponent cap."""
    seq = make_sequence(SequenceFamily.spin_echo(1.0))
    mu = optimize.brentq(
        lambda m: _echo_angle(seq, m) - np.pi / 2, 1e-6, 1.0, xtol=1e-15
    )
    bath = SpinBath(((1.0, mu),))
    assert spin_spin_exact(seq, bath) == 0.0

    curve = spin_echo_curve([0.5, 1.0], bath)
    assert np.all(np.isfinite(curve.chi))
    np.testing.assert_array_equal(curve.at_floor, [False, True])
    assert curve.chi[1] == CHI_MAX
    assert np.all(curve.W > 0.0)
    assert curve.W[0] < 1.0


def _echo_angle(seq, mu):
    gamma = np.hypot(1.0, 2 * mu)
    return np.arctan2(2 * mu, 1.0) * gamma * abs(filter_transform(seq, gamma))


def test_curve_csv(tmp_path, white):
    """Test that a saved curve reads back with its header."""
    curve = coherence_curve(SequenceFamily.cpmg(0.5, 2), white, [2, 4, 8])
    path = curve.to_csv(tmp_path / "coherence.csv", header={"seed": 0})
    loaded = CoherenceCurve.from_csv(path)
    np.testing.assert_array_equal(loaded.t, curve.t)
    np.testing.assert_array_equal(loaded.chi, curve.chi)
    assert loaded.protocol == {"seed": "0"}
    assert path.read_text().startswith("# seed=0\nt,W,chi\n")
