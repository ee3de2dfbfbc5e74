from .baths import (
    BosonBath,
    SpinBath,
    boson_to_spectrum,
    occupation,
    spinbath_to_spectrum,
)
from .models import (
    BosonThermal,
    InvalidSpectrumError,
    Lorentzian,
    NoiseSpectrum,
    OhmicThermal,
    OneOverF,
    SpinSpinWeak,
    SumSpectrum,
    Tabulated,
    White,
    eval_spectrum,
    lorentzian_plus_white,
)
from .serialization import bath_from_dict, spectrum_from_dict, spectrum_to_dict

__all__ = [
    "BosonBath",
    "BosonThermal",
    "InvalidSpectrumError",
    "Lorentzian",
    "NoiseSpectrum",
    "OhmicThermal",
    "OneOverF",
    "SpinBath",
    "SpinSpinWeak",
    "SumSpectrum",
    "Tabulated",
    "White",
    "bath_from_dict",
    "boson_to_spectrum",
    "eval_spectrum",
    "lorentzian_plus_white",
    "occupation",
    "spectrum_from_dict",
    "spectrum_to_dict",
    "spinbath_to_spectrum",
]
