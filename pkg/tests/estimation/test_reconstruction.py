import json

import numpy as np
import pytest

from dd_noise_spectroscopy.coherence import odd_harmonic_tail
from dd_noise_spectroscopy.estimation import (
    FIT_FAMILIES,
    FrequencyRange,
    SpectrumFitError,
    T2Estimate,
    T2Scan,
    fit_objective,
    fit_spectrum,
    pointwise_reconstruct,
    synthetic_scan,
)
from dd_noise_spectroscopy.estimation.scan import ScanEntry
from dd_noise_spectroscopy.spectra import Lorentzian, OhmicThermal, OneOverF, White

TAUS = np.geomspace(0.05, 5.0, 12)


@pytest.fixture(scope="module")
def lorentzian_scan():
    return synthetic_scan(Lorentzian(1.0, 1.0), TAUS, L=25)


def test_pointwise_first_harmonic():
    """Test S_hat = (pi^2 / 4) / T2L with multiplicative stderr."""
    rate = 0.405285
    estimate = T2Estimate(
        t2=1 / rate, fit_window=(0.0, 1.0), residual_rms=0, stderr_t2=0.1 / rate**2
    )
    scan = T2Scan((ScanEntry(tau=1.0, t2l=estimate, n_used=4),))
    (point,) = pointwise_reconstruct(scan)
    assert point.s_hat == pytest.approx(1.0, abs=1e-5)
    assert point.stderr == pytest.approx(np.pi**2 / 4 * 0.1)
    assert point.omega == pytest.approx(np.pi / 2)


def test_pointwise_overshoots_flat_spectrum():
    scan = synthetic_scan(White(2.0), [0.1, 1.0], L=5000)
    for point in pointwise_reconstruct(scan):
        assert point.s_hat == pytest.approx(np.pi**2 / 8 * 2.0, rel=1e-3)


def test_pointwise_overshoot_for_steep_tail():
    """Test the pi^4 / 96 harmonic overshoot where S ~ omega^-2."""
    spectrum = Lorentzian(1.0, 1.0)
    scan = synthetic_scan(spectrum, [0.002], L=2000)
    (point,) = pointwise_reconstruct(scan)
    ratio = point.s_hat / spectrum(point.omega)
    assert ratio == pytest.approx(np.pi**4 / 96, rel=1e-4)


def test_pointwise_empty_scan():
    with pytest.raises(ValueError):
        pointwise_reconstruct(T2Scan(()))


def test_objective_vanishes_at_truth(lorentzian_scan):
    assert fit_objective(lorentzian_scan, Lorentzian(1.0, 1.0)) <= 1e-10


def test_noiseless_round_trip(lorentzian_scan):
    """Test that a noiseless Lorentzian scan is recovered within 1 %."""
    result = fit_spectrum(lorentzian_scan, "lorentzian", L=25, seed=3)
    assert result.params["sigma2"] == pytest.approx(1.0, rel=0.01)
    assert result.params["tau_c"] == pytest.approx(1.0, rel=0.01)
    assert result.residual_rms < 1e-6
    assert result.at_bound == ()
    assert len(result.starts) == 9
    assert len(result.points) == 12
    assert result.covariance.shape == (2, 2)


def test_noisy_round_trip():
    """Test the median recovery over 20 scans with 3 % rate noise."""
    fitted = []
    for seed in range(20):
        scan = synthetic_scan(Lorentzian(1.0, 1.0), TAUS, noise_level=0.03, seed=seed)
        result = fit_spectrum(scan, "lorentzian", seed=seed)
        fitted.append([result.params["sigma2"], result.params["tau_c"]])
    median = np.median(fitted, axis=0)
    np.testing.assert_allclose(median, [1.0, 1.0], rtol=0.1)


def test_fit_is_deterministic(lorentzian_scan):
    first = fit_spectrum(lorentzian_scan, "lorentzian", seed=5, max_workers=1)
    second = fit_spectrum(lorentzian_scan, "lorentzian", seed=5, max_workers=4)
    assert first.params == second.params
    assert first.best_start == second.best_start
    assert first.starts == second.starts


def test_harmonic_cutoff_on_one_over_f():
    """Test that L = 10 and L = 40 agree within the neglected harmonic weight."""
    omegas = np.pi / (2 * TAUS)
    fixed = {"omega_min": 0.1 * omegas.min(), "omega_max": 1e3 * omegas.max()}
    spectrum = OneOverF(2.0, **fixed)
    scan = synthetic_scan(spectrum, TAUS, L=40)
    short = fit_spectrum(scan, "one_over_f", L=10, fixed=fixed)
    long = fit_spectrum(scan, "one_over_f", L=40, fixed=fixed)
    shift = abs(short.params["amplitude"] - long.params["amplitude"])
    assert long.params["amplitude"] == pytest.approx(2.0, rel=1e-6)
    assert shift / long.params["amplitude"] < 4 / np.pi**2 * odd_harmonic_tail(10)


def test_lorentzian_white_round_trip():
    from dd_noise_spectroscopy.spectra import lorentzian_plus_white

    taus = np.geomspace(0.01, 5.0, 14)
    scan = synthetic_scan(lorentzian_plus_white(1.0, 1.0, 0.05), taus)
    result = fit_spectrum(scan, "lorentzian_white", n_starts=12)
    assert result.params["sigma2"] == pytest.approx(1.0, rel=0.01)
    assert result.params["tau_c"] == pytest.approx(1.0, rel=0.01)
    assert result.params["s_inf"] == pytest.approx(0.05, rel=0.02)


def test_ohmic_round_trip():
    spectrum = OhmicThermal(eta=0.1, omega_cutoff=5.0)
    scan = synthetic_scan(spectrum, TAUS)
    result = fit_spectrum(scan, "ohmic")
    assert result.params["eta"] == pytest.approx(0.1, rel=0.01)
    assert result.params["omega_cutoff"] == pytest.approx(5.0, rel=0.01)
    assert result.fixed["beta"] == float("inf")


def test_wrong_family_is_a_fit_failure(lorentzian_scan):
    with pytest.raises(SpectrumFitError):
        fit_spectrum(lorentzian_scan, "white")


def test_parameter_at_bound_is_flagged(lorentzian_scan):
    result = fit_spectrum(
        lorentzian_scan,
        "lorentzian",
        bounds={"tau_c": (1.2, 5.0)},
        max_relative_rms=1.0,
    )
    assert "tau_c" in result.at_bound
    assert result.params["tau_c"] == pytest.approx(1.2, rel=1e-4)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"model": "gaussian"},
        {"model": "lorentzian", "L": 5},
        {"model": "lorentzian", "n_starts": 4},
        {"model": "lorentzian", "bounds": {"tau_c": (2.0, 1.0)}},
    ],
)
def test_invalid_fit_requests(kwargs, lorentzian_scan):
    with pytest.raises(ValueError):
        fit_spectrum(lorentzian_scan, **kwargs)


def test_too_few_entries():
    scan = synthetic_scan(Lorentzian(1.0, 1.0), TAUS[:3])
    with pytest.raises(ValueError):
        fit_spectrum(scan, "lorentzian")


def test_result_json(tmp_path, lorentzian_scan):
    result = fit_spectrum(
        lorentzian_scan,
        "lorentzian",
        frequency_range=FrequencyRange(omega_lo=0.1, omega_hi=100.0),
    )
    path = result.to_json(tmp_path / "reconstruction.json", {"seed": 0})
    payload = json.loads(path.read_text())
    assert payload["model"] == "lorentzian"
    assert payload["spectrum"]["model"] == "lorentzian"
    assert payload["freq_range"] == [0.1, 100.0]
    assert payload["provenance"] == {"seed": 0}
    assert len(payload["covariance"]) == 2
    assert set(payload["params"]) == set(FIT_FAMILIES["lorentzian"].param_names)
