"""JSON form of spectra and baths: {"model": name, "params": {...}}."""

from typing import Any, Callable, Dict, Mapping, Union

from .baths import BosonBath, SpinBath
from .models import (
    InvalidSpectrumError,
    Lorentzian,
    NoiseSpectrum,
    OhmicThermal,
    OneOverF,
    SpinSpinWeak,
    SumSpectrum,
    Tabulated,
    White,
)


def _beta(value: Any) -> float:
    # null (or absent) encodes zero temperature
    return float("inf") if value is None else float(value)


_BUILDERS: Dict[str, Callable[[Mapping[str, Any]], NoiseSpectrum]] = {
    "white": lambda p: White(s0=float(p["s0"])),
    "lorentzian": lambda p: Lorentzian(
        sigma2=float(p["sigma2"]), tau_c=float(p["tau_c"])
    ),
    "one_over_f": lambda p: OneOverF(
        amplitude=float(p["amplitude"]),
        omega_min=float(p["omega_min"]),
        omega_max=float(p["omega_max"]),
    ),
    "ohmic": lambda p: OhmicThermal(
        eta=float(p["eta"]),
        omega_cutoff=float(p["omega_cutoff"]),
        beta=_beta(p.get("beta")),
    ),
    "spin_spin_weak": lambda p: SpinSpinWeak(
        modes=tuple(tuple(m) for m in p["modes"]),
        broadening=float(p["broadening"]),
    ),
    "tabulated": lambda p: Tabulated(
        omegas=tuple(p["omegas"]), values=tuple(p["values"])
    ),
    "sum": lambda p: SumSpectrum(
        tuple(spectrum_from_dict(c) for c in p["components"])
    ),
}


def spectrum_to_dict(spectrum: NoiseSpectrum) -> Dict[str, Any]:
    return spectrum.to_dict()


def spectrum_from_dict(payload: Mapping[str, Any]) -> NoiseSpectrum:
    """Build a spectrum model from its JSON document.

    Raises:
        InvalidSpectrumError: Unknown model, missing or invalid parameters.
    """
    model = payload.get("model")
    if model not in _BUILDERS:
        raise InvalidSpectrumError(
            f"Unknown spectrum model {model!r}; expected one of {sorted(_BUILDERS)}"
        )
    try:
        return _BUILDERS[model](payload.get("params", {}))
    except (KeyError, TypeError) as e:
        raise InvalidSpectrumError(f"Bad parameters for {model}: {e}") from e


def bath_from_dict(payload: Mapping[str, Any]) -> Union[SpinBath, BosonBath]:
    """Build a bath from {"kind": "spin", "modes": [[w, mu], ...]} or
    {"kind": "boson", "model": "ohmic", "eta": .., "omega_cutoff": .., "beta": ..}.
    """
    kind = payload.get("kind")
    try:
        if kind == "spin":
            return SpinBath(
                modes=tuple(tuple(m) for m in payload["modes"]),
                weak_coupling=bool(payload.get("weak_coupling", False)),
            )
        if kind == "boson" and payload.get("model", "ohmic") == "ohmic":
            return BosonBath.ohmic(
                eta=float(payload["eta"]),
                omega_cutoff=float(payload["omega_cutoff"]),
                beta=_beta(payload.get("beta")),
            )
    except (KeyError, TypeError) as e:
        raise InvalidSpectrumError(f"Bad bath parameters: {e}") from e
    raise InvalidSpectrumError(f"Unsupported bath description {dict(payload)}")
