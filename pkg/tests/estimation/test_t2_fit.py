import numpy as np
import pytest

from dd_noise_spectroscopy.coherence import CoherenceCurve
from dd_noise_spectroscopy.estimation import (
    T2Estimate,
    T2FitRejected,
    WindowPolicy,
    fit_t2,
    measure_t2se,
    t2se_to_s0,
)


def curve_from(t, ln_w):
    return CoherenceCurve(t=np.asarray(t), chi=-np.asarray(ln_w))


def test_exact_exponential():
    """Test that W = exp(-t / 5) gives t2 = 5 with zero residual."""
    t = np.linspace(0.5, 20.0, 40)
    estimate = fit_t2(curve_from(t, -t / 5))
    assert estimate.t2 == pytest.approx(5.0, rel=1e-10)
    assert estimate.residual_rms == pytest.approx(0.0, abs=1e-12)
    assert estimate.window == "amplitude"
    lo, hi = estimate.fit_window
    assert np.exp(-lo / 5) <= 0.5 and np.exp(-hi / 5) >= 0.05


def test_offset_does_not_bias_slope():
    t = np.linspace(0.5, 20.0, 40)
    estimate = fit_t2(curve_from(t, np.log(0.8) - t / 5))
    assert estimate.t2 == pytest.approx(5.0, rel=1e-10)


def test_gaussian_decay_rejected():
    """Test that a Gaussian decay fails the residual gate."""
    t = np.linspace(0.2, 12.0, 60)
    with pytest.raises(T2FitRejected, match="not exponential"):
        fit_t2(curve_from(t, -((t / 5) ** 2)))


def test_too_few_points():
    t = np.linspace(1.0, 5.0, 5)
    with pytest.raises(T2FitRejected):
        fit_t2(curve_from(t, -t))
    t = np.linspace(0.1, 1.0, 20)
    with pytest.raises(T2FitRejected, match="window"):
        fit_t2(curve_from(t, -0.01 * t))


def test_non_monotone_decay_rejected():
    t = np.linspace(0.5, 20.0, 40)
    ln_w = -t / 5
    ln_w[20] += 0.3
    with pytest.raises(T2FitRejected, match="monotonically"):
        fit_t2(curve_from(t, ln_w))


def test_tail_mode():
    """Test exponent-space fits far below the amplitude window."""
    t = np.linspace(10.0, 200.0, 30)
    ln_w = np.log(0.3) - t / 4
    estimate = fit_t2(curve_from(t, ln_w), WindowPolicy(mode="tail"))
    assert estimate.t2 == pytest.approx(4.0, rel=1e-10)
    assert estimate.window == "tail"
    assert estimate.fit_window[0] >= 105.0
    with pytest.raises(T2FitRejected):
        fit_t2(curve_from(t, ln_w))


def test_noisy_fit_reports_stderr():
    rng = np.random.default_rng(4)
    t = np.linspace(0.5, 20.0, 80)
    ln_w = -t / 5 + 0.005 * rng.standard_normal(t.size)
    estimate = fit_t2(curve_from(t, ln_w))
    assert estimate.t2 == pytest.approx(5.0, rel=0.05)
    assert 0 < estimate.stderr_t2 < 0.5
    assert estimate.rate_stderr == pytest.approx(estimate.stderr_t2 / estimate.t2**2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"w_lo": 0.5, "w_hi": 0.05},
        {"w_lo": 0.0},
        {"min_points": 2},
        {"mode": "median"},
        {"tail_fraction": 0.0},
    ],
)
def test_invalid_window_policy(kwargs):
    with pytest.raises(ValueError):
        WindowPolicy(**kwargs)


def test_t2se_to_s0():
    estimate = T2Estimate(t2=4.0, fit_window=(1.0, 2.0), residual_rms=0.0, stderr_t2=0)
    assert t2se_to_s0(estimate) == pytest.approx(0.5)


def test_t2se_of_lorentzian(lorentzian):
    """Test S0_hat = 2 / T2SE = 2 sigma2 tau_c within 3 %."""
    taus = np.linspace(0.25, 12.0, 48)
    deep = WindowPolicy(w_lo=1e-7, w_hi=1e-3)
    estimate = measure_t2se(lorentzian, taus, deep)
    assert t2se_to_s0(estimate) == pytest.approx(2.0, rel=0.03)
    tail = measure_t2se(lorentzian, taus, WindowPolicy(mode="tail"))
    assert t2se_to_s0(tail) == pytest.approx(2.0, rel=0.03)


def test_t2se_of_white_noise(white):
    taus = np.linspace(0.5, 20.0, 40)
    estimate = measure_t2se(white, taus)
    assert t2se_to_s0(estimate) == pytest.approx(white.s0, rel=1e-9)
