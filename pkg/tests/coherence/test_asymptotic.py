import numpy as np
import pytest

from dd_noise_spectroscopy.coherence import (
    asymptotic_rate,
    coherence_exponent,
    harmonic_sum,
    odd_harmonic_tail,
)
from dd_noise_spectroscopy.pulses import (
    InvalidSequenceError,
    SequenceFamily,
    make_sequence,
)
from dd_noise_spectroscopy.spectra import lorentzian_plus_white


def lorentzian_rate(tau, sigma2=1.0, tau_c=1.0):
    """Untruncated harmonic sum for a Lorentzian, a = pi tau_c / 2 tau."""
    a = np.pi * tau_c / (2 * tau)
    return sigma2 * tau_c * (1 - 2 * a / np.pi * np.tanh(np.pi / (2 * a)))


def test_odd_harmonic_tail():
    """Test the polygamma tail against a long direct sum."""
    odd = 2.0 * np.arange(26, 2_000_000) + 1.0
    direct = np.sum(1.0 / odd**2) + 1 / (4 * 2_000_000)
    assert odd_harmonic_tail(25) == pytest.approx(direct, rel=1e-6)
    assert odd_harmonic_tail(0) == pytest.approx(np.pi**2 / 8 - 1)


def test_white_noise_rate(white):
    """Test rate -> S0 / 2 with the neglected harmonics inside the tail bound."""
    rate = asymptotic_rate(SequenceFamily.cpmg(0.3, 4), white, L=25)
    assert rate.rate < white.s0 / 2
    assert white.s0 / 2 - rate.rate <= rate.tail_bound * (1 + 1e-12)
    assert rate.rate + rate.tail_bound == pytest.approx(white.s0 / 2, rel=1e-12)
    assert rate.harmonics_used == 25
    assert rate.t2l == pytest.approx(1 / rate.rate)


@pytest.mark.parametrize("tau", [0.1, 1.0, 25.0])
def test_lorentzian_rate_within_tail_bound(tau, lorentzian):
    rate = asymptotic_rate(SequenceFamily.apcp(tau, 2), lorentzian, L=25)
    exact = lorentzian_rate(tau)
    assert abs(exact - rate.rate) <= rate.tail_bound


def test_long_spacing_limit(lorentzian):
    """Test 1/T2L -> S(0) / 2 as the first harmonic approaches zero frequency."""
    s0_half = lorentzian(0.0) / 2
    # pi / 2 tau = 0.02 / tau_c
    tau = np.pi / (2 * 0.02)
    rate = asymptotic_rate(SequenceFamily.cpmg(tau, 2), lorentzian, L=25)
    assert rate.rate == pytest.approx(s0_half, rel=0.02)
    # pi / 2 tau = 0.05 / tau_c sits 0.1 / pi below the limit
    tau = np.pi / (2 * 0.05)
    rate = asymptotic_rate(SequenceFamily.cpmg(tau, 2), lorentzian, L=25)
    assert rate.rate == pytest.approx(1 - 0.1 / np.pi, rel=1e-3)

    rates = [
        asymptotic_rate(SequenceFamily.cpmg(t, 2), lorentzian, L=25).rate
        for t in np.geomspace(0.5, 500, 12)
    ]
    assert np.all(np.diff(rates) > 0)
    assert rates[-1] < s0_half


def test_short_spacing_limit():
    """Test 1/T2L -> S_inf / 2 for a white plateau as tau -> 0."""
    spectrum = lorentzian_plus_white(1.0, 1.0, 0.8)
    rate = asymptotic_rate(SequenceFamily.cpmg(1e-4, 2), spectrum, L=200)
    assert rate.rate == pytest.approx(0.4, rel=0.01)


def test_matches_finite_train_slope(lorentzian):
    """Test the rate against the slope of chi between 200 and 400 pulses."""
    tau = 0.1
    family = SequenceFamily.cpmg(tau, 200)
    chi_200 = coherence_exponent(make_sequence(family), lorentzian, tol=1e-9)
    chi_400 = coherence_exponent(
        make_sequence(family.with_pulse_count(400)), lorentzian, tol=1e-9
    )
    slope = (chi_400 - chi_200) / (2 * tau * 200)
    rate = asymptotic_rate(family, lorentzian, L=25)
    assert rate.rate == pytest.approx(slope, rel=0.01)


def test_harmonic_sum_vectorized(lorentzian):
    taus = np.array([0.1, 1.0, 10.0])
    values = harmonic_sum(lorentzian, taus, 25)
    assert values.shape == (3,)
    assert values[1] == pytest.approx(harmonic_sum(lorentzian, 1.0, 25))
    assert isinstance(harmonic_sum(lorentzian, 1.0, 25), float)


def test_rate_needs_equidistant_family(lorentzian):
    with pytest.raises(InvalidSequenceError):
        asymptotic_rate(SequenceFamily.udd(1.0, 4), lorentzian)
    with pytest.raises(ValueError):
        asymptotic_rate(SequenceFamily.cpmg(1.0, 2), lorentzian, L=0)
