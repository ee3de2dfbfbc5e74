import numpy as np
import pytest

from dd_noise_spectroscopy.stochastic import (
    InvalidProcessError,
    OUProcessParams,
    estimate_spectrum_from_trajectories,
    sampled_ou_spectrum,
)


@pytest.fixture(scope="module")
def estimate():
    params = OUProcessParams(sigma2=1.0, tau_c=1.0, seed=5, dt=0.1, n_traj=200)
    return estimate_spectrum_from_trajectories(params, t_end=2000.0)


def test_zero_frequency(estimate):
    """Test S_hat(0) = 2 sigma2 tau_c within 5 %."""
    assert estimate(0.0) == pytest.approx(2.0, rel=0.05)


def test_lorentzian_shape(estimate):
    for omega, expected in ((1.0, 1.0), (2.0, 0.4)):
        assert estimate(omega) == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("omega", [0.1, 5.0, 10.0, 20.0])
def test_continuous_spectrum_off_peak(estimate, omega):
    """Test that the estimate follows the continuous Lorentzian away from omega = 1."""
    assert estimate(omega) == pytest.approx(2.0 / (1.0 + omega**2), rel=0.05)


def test_sampled_spectrum_is_aliased_lorentzian():
    params = OUProcessParams(sigma2=1.0, tau_c=1.0, dt=0.1)
    omegas = np.array([0.0, 1.0, 10.0, np.pi / params.dt])
    shifts = 2 * np.pi * np.arange(-4000, 4001) / params.dt
    folded = params.spectrum(omegas[:, None] + shifts[None, :]).sum(axis=1)
    np.testing.assert_allclose(sampled_ou_spectrum(params, omegas), folded, rtol=1e-3)
    assert sampled_ou_spectrum(params, 10.0) > params.spectrum(10.0) * 1.05


def test_frequency_grid(estimate):
    omegas = np.asarray(estimate.omegas)
    assert omegas[0] == 0.0
    assert omegas[-1] <= np.pi / 0.1 + 1e-9


def test_record_too_short():
    params = OUProcessParams(sigma2=1.0, tau_c=1.0, dt=0.1, n_traj=100)
    with pytest.raises(InvalidProcessError):
        estimate_spectrum_from_trajectories(params, t_end=20.0)


def test_white_noise_limit_rejected():
    with pytest.raises(InvalidProcessError):
        OUProcessParams(sigma2=1.0, tau_c=0.001, dt=0.01)
