import numpy as np
import pytest
from scipy import integrate

from dd_noise_spectroscopy.spectra import (
    BosonBath,
    InvalidSpectrumError,
    OhmicThermal,
    SpinBath,
    bath_from_dict,
    boson_to_spectrum,
    occupation,
    spectrum_from_dict,
    spectrum_to_dict,
    spinbath_to_spectrum,
)
from dd_noise_spectroscopy.spectra.models import (
    Lorentzian,
    OneOverF,
    SpinSpinWeak,
    Tabulated,
    White,
    lorentzian_plus_white,
)


def test_occupation():
    assert occupation(1.0, np.log(2.0)) == pytest.approx(1.0)
    assert occupation(1.0, np.inf) == 0.0
    np.testing.assert_allclose(occupation([1.0, 2.0], np.inf), [0.0, 0.0])


def test_zero_temperature_boson_bath():
    """Test S = pi J when n_b = 0."""
    bath = BosonBath(spectral_density=lambda w: 2.0 * np.ones_like(w))
    spectrum = boson_to_spectrum(bath)
    assert spectrum(0.7) == pytest.approx(2 * np.pi)


def test_thermal_boson_bath():
    """Test S = pi J (2 n_b + 1) for a generic spectral density."""
    beta = 0.8
    bath = BosonBath(spectral_density=lambda w: w**3, beta=beta, scale=1.0)
    spectrum = boson_to_spectrum(bath)
    omega = 1.3
    expected = np.pi * omega**3 * (2 * occupation(omega, beta) + 1)
    assert spectrum(omega) == pytest.approx(expected)
    assert spectrum(0.0) == pytest.approx(0.0, abs=1e-12)


def test_ohmic_bath_maps_to_ohmic_model():
    bath = BosonBath.ohmic(eta=0.3, omega_cutoff=2.0, beta=1.5)
    spectrum = boson_to_spectrum(bath)
    assert spectrum == OhmicThermal(eta=0.3, omega_cutoff=2.0, beta=1.5)
    omega = 0.9
    j = 0.3 * omega * np.exp(-omega / 2.0)
    expected = np.pi * j * (2 * occupation(omega, 1.5) + 1)
    assert spectrum(omega) == pytest.approx(expected)


def test_spin_bath_weight():
    """Test that one smoothed mode carries weight 4 pi mu^2 on omega > 0."""
    bath = SpinBath(((5.0, 0.3),))
    spectrum = spinbath_to_spectrum(bath, broadening=0.2)
    omegas = np.linspace(0.0, 10.0, 20001)
    weight = integrate.trapezoid(spectrum(omegas), omegas)
    assert weight == pytest.approx(4 * np.pi * 0.3**2, rel=1e-6)
    assert np.argmax(spectrum(omegas)) == 10000


def test_spin_mode_near_zero_keeps_weight():
    """Test that a mode within the broadening of zero folds onto omega >= 0."""
    spectrum = SpinSpinWeak(((0.01, 0.2),), broadening=0.05)
    omegas = np.linspace(0.0, 1.0, 20001)
    weight = integrate.trapezoid(spectrum(omegas), omegas)
    assert weight == pytest.approx(4 * np.pi * 0.2**2, rel=1e-6)
    peak = np.exp(-0.5 * 0.2**2) / (np.sqrt(2 * np.pi) * 0.05)
    assert spectrum(0.0) == pytest.approx(2 * 4 * np.pi * 0.2**2 * peak)
    np.testing.assert_allclose(spectrum(-omegas), spectrum(omegas))


def test_empty_spin_bath_rejected():
    with pytest.raises(InvalidSpectrumError):
        spinbath_to_spectrum(SpinBath(()), broadening=0.1)


def test_weak_coupling_assertion():
    SpinBath(((1.0, 0.1),), weak_coupling=True)
    with pytest.raises(InvalidSpectrumError):
        SpinBath(((1.0, 0.5),), weak_coupling=True)


def test_invalid_spin_modes():
    with pytest.raises(InvalidSpectrumError):
        SpinBath(((0.0, 0.1),))
    with pytest.raises(InvalidSpectrumError):
        SpinBath(((1.0, -0.1),))


@pytest.mark.parametrize(
    "spectrum",
    [
        White(0.4),
        Lorentzian(1.0, 2.0),
        OneOverF(1.0, 0.1, 10.0),
        OhmicThermal(0.2, 3.0),
        OhmicThermal(0.2, 3.0, beta=4.0),
        SpinSpinWeak(((1.0, 0.05), (2.0, 0.01)), broadening=0.1),
        Tabulated((0.0, 1.0), (1.0, 0.5)),
        lorentzian_plus_white(1.0, 1.0, 0.1),
    ],
)
def test_spectrum_json_form(spectrum):
    assert spectrum_from_dict(spectrum_to_dict(spectrum)) == spectrum


def test_unknown_spectrum_model():
    with pytest.raises(InvalidSpectrumError):
        spectrum_from_dict({"model": "pink"})
    with pytest.raises(InvalidSpectrumError):
        spectrum_from_dict({"model": "lorentzian", "params": {"sigma2": 1.0}})


def test_bath_from_dict():
    spin = bath_from_dict({"kind": "spin", "modes": [[1.0, 0.01]]})
    assert isinstance(spin, SpinBath)
    assert spin.modes == ((1.0, 0.01),)
    boson = bath_from_dict(
        {"kind": "boson", "model": "ohmic", "eta": 1.0, "omega_cutoff": 2.0}
    )
    assert boson.beta == np.inf
    with pytest.raises(InvalidSpectrumError):
        bath_from_dict({"kind": "phonon"})
