import numpy as np
import pytest

from dd_noise_spectroscopy.stochastic import (
    InvalidProcessError,
    OUProcessParams,
    generate_ou,
)


@pytest.fixture(scope="module")
def paths():
    """400 trajectories of 10^4 steps at dt = tau_c / 10."""
    params = OUProcessParams(sigma2=1.5, tau_c=1.0, seed=11, dt=0.1)
    return generate_ou(params, t_end=1000.0, n_paths=400)


def test_grid_shape(paths):
    assert paths.shape == (400, 10001)


def test_stationary_variance(paths):
    """Test that the exact update keeps the variance at sigma2."""
    assert np.var(paths) == pytest.approx(1.5, rel=0.01)
    assert np.var(paths[:, 0]) == pytest.approx(1.5, rel=0.25)


def test_autocorrelation_at_correlation_time(paths):
    """Test <xi(t) xi(t + tau_c)> = sigma2 / e."""
    lag = 10
    correlation = np.mean(paths[:, :-lag] * paths[:, lag:])
    assert correlation == pytest.approx(1.5 * np.exp(-1), rel=0.02)


def test_seeded_generation_is_reproducible():
    params = OUProcessParams(sigma2=1.0, tau_c=1.0, seed=3, dt=0.05)
    first = generate_ou(params, t_end=5.0, n_paths=3)
    np.testing.assert_array_equal(first, generate_ou(params, t_end=5.0, n_paths=3))
    other = OUProcessParams(sigma2=1.0, tau_c=1.0, seed=4, dt=0.05)
    assert not np.array_equal(first, generate_ou(other, t_end=5.0, n_paths=3))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sigma2": 0.0, "tau_c": 1.0},
        {"sigma2": 1.0, "tau_c": 0.0},
        {"sigma2": 1.0, "tau_c": 1.0, "dt": 0.2},
        {"sigma2": 1.0, "tau_c": 1.0, "dt": -0.01},
        {"sigma2": 1.0, "tau_c": 1.0, "n_traj": 50},
        {"sigma2": 1.0, "tau_c": 1.0, "seed": -1},
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(InvalidProcessError):
        OUProcessParams(**kwargs)


def test_sample_budget():
    params = OUProcessParams(sigma2=1.0, tau_c=1.0, dt=0.1)
    with pytest.raises(InvalidProcessError):
        generate_ou(params, t_end=1e6, n_paths=1000)
    with pytest.raises(InvalidProcessError):
        generate_ou(params, t_end=0.0)


def test_spectrum_of_process():
    params = OUProcessParams(sigma2=2.0, tau_c=0.5)
    assert params.spectrum(0.0) == pytest.approx(2.0)
    assert params.to_dict()["n_traj"] == 10_000
