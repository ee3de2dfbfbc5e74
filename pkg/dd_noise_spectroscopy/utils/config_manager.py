import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from .. import __version__
from ..coherence.curves import Noise
from ..estimation import FrequencyRange, WindowPolicy, frequency_bounds
from ..pulses import SequenceFamily
from ..spectra import (
    BosonBath,
    NoiseSpectrum,
    SpinBath,
    bath_from_dict,
    boson_to_spectrum,
    spectrum_from_dict,
    spinbath_to_spectrum,
)
from ..stochastic import OUProcessParams
from .generate_hash import generate_hash

PROJECT_ROOT = Path(__file__).parent.parent.parent
CONFIG_DIR = PROJECT_ROOT / "dd_noise_spectroscopy" / "configs"

DEFAULT_CONFIG: Dict[str, Any] = {
    "spectrum": None,
    "bath": None,
    "broadening": None,
    "sequence": {"kind": "cpmg", "tau": 1.0, "n": 8},
    "taus": None,
    "se_taus": None,
    "omega_grid": {"start": 0.0, "stop": 10.0, "num": 201, "spacing": "linear"},
    "n_list": None,
    "pulse_budget": 1000,
    "window": {},
    "harmonics": 25,
    "tolerance": 1e-6,
    "ou": {"sigma2": 1.0, "tau_c": 1.0, "dt": 0.01, "n_traj": 10000},
    "mc_suite": None,
    "mc_batches": 20,
    "model": "lorentzian",
    "n_starts": 8,
    "fit_bounds": None,
    "fit_fixed": None,
    "scan": None,
    "tau_p": None,
    "t2_se": None,
    "force": False,
    "seed": 0,
    "output_dir": "results",
    "max_workers": 4,
}

# Sections merged key by key instead of replaced
_NESTED = ("ou", "window")

Grid = Union[List[float], Mapping[str, Any]]


class ConfigError(ValueError):
    """Raised for unreadable or invalid run configurations."""


def load_config(path: Optional[Path]) -> Dict[str, Any]:
    """Read a run configuration file; no path gives an empty document."""
    if path is None:
        return {}
    path = Path(path)
    if not path.exists() and not path.is_absolute():
        candidate = CONFIG_DIR / path
        if candidate.exists():
            path = candidate
    try:
        with open(path, "r") as f:
            payload = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Configuration file not found at {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration file {path} is not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"Configuration file {path} must hold a JSON object")
    return payload


def merge_config(*layers: Mapping[str, Any]) -> Dict[str, Any]:
    """Merge configuration layers; later layers win, None values are skipped."""
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for layer in layers:
        unknown = set(layer) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"Unknown configuration keys {sorted(unknown)}")
        for key, value in layer.items():
            if value is None:
                continue
            if key in _NESTED and isinstance(value, Mapping):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = copy.deepcopy(value)
    return merged


def _grid(spec: Grid, name: str) -> np.ndarray:
    if isinstance(spec, Mapping):
        try:
            start, stop = float(spec["start"]), float(spec["stop"])
            num = int(spec["num"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{name} needs start, stop and num: {e}") from e
        spacing = spec.get("spacing", "linear")
        if num < 1:
            raise ConfigError(f"{name} is empty")
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"Log-spaced {name} needs positive bounds")
            return np.geomspace(start, stop, num)
        if spacing == "linear":
            return np.linspace(start, stop, num)
        raise ConfigError(f"Unknown spacing {spacing!r} for {name}")
    grid = np.asarray(spec, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError(f"{name} is empty")
    return grid


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one run: defaults < file < CLI overrides."""

    values: Dict[str, Any]

    @classmethod
    def load(
        cls,
        path: Optional[Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        return cls(merge_config(load_config(path), overrides or {}))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def config_hash(self) -> str:
        return generate_hash(self.values)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output_dir"])

    @property
    def max_workers(self) -> int:
        return max(1, int(self.values["max_workers"]))

    def provenance(self) -> Dict[str, Any]:
        """Header embedded in every output file."""
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": __version__,
        }

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if self.values.get(k) is None]
        if missing:
            raise ConfigError(f"Configuration lacks {missing}")

    def family(self) -> SequenceFamily:
        return SequenceFamily.from_dict(self.values["sequence"])

    def noise(self) -> Noise:
        """Noise source: a spectrum, or a spin bath treated exactly."""
        spectrum, bath = self.values["spectrum"], self.values["bath"]
        if (spectrum is None) == (bath is None):
            raise ConfigError("Configure exactly one of spectrum and bath")
        if spectrum is not None:
            return spectrum_from_dict(spectrum)
        parsed = bath_from_dict(bath)
        if isinstance(parsed, BosonBath):
            return boson_to_spectrum(parsed)
        return parsed

    def spectrum(self) -> NoiseSpectrum:
        """Noise as a spectrum; spin baths need a broadening for this."""
        noise = self.noise()
        if isinstance(noise, SpinBath):
            if self.values["broadening"] is None:
                raise ConfigError("A spin bath needs a broadening to act as a spectrum")
            return spinbath_to_spectrum(noise, float(self.values["broadening"]))
        return noise

    def taus(self) -> np.ndarray:
        self.require("taus")
        return _grid(self.values["taus"], "taus")

    def se_taus(self) -> np.ndarray:
        self.require("se_taus")
        return _grid(self.values["se_taus"], "se_taus")

    def omega_grid(self) -> np.ndarray:
        return _grid(self.values["omega_grid"], "omega_grid")

    def n_list(self) -> List[int]:
        self.require("n_list")
        spec = self.values["n_list"]
        if isinstance(spec, Mapping):
            grid = np.unique(np.rint(_grid(spec, "n_list")).astype(int))
            return [int(n) for n in grid]
        return [int(n) for n in spec]

    def window_policy(self) -> WindowPolicy:
        try:
            return WindowPolicy(**self.values["window"])
        except TypeError as e:
            raise ConfigError(f"Bad window settings: {e}") from e

    def ou_params(self) -> OUProcessParams:
        try:
            return OUProcessParams(seed=self.seed, **self.values["ou"])
        except TypeError as e:
            raise ConfigError(f"Bad ou settings: {e}") from e

    def frequency_range(self) -> Optional[FrequencyRange]:
        """Bounds from tau_p and t2_se when both are configured."""
        tau_p, t2_se = self.values["tau_p"], self.values["t2_se"]
        if tau_p is None or t2_se is None:
            return None
        return frequency_bounds(float(t2_se), float(tau_p))

    def validate(self) -> "RunConfig":
        """Build every configured object so errors surface before computing.

        Raises:
            ConfigError: Wrapping any invalid parameter.
        """
        try:
            self.family()
            if self.values["spectrum"] is not None or self.values["bath"] is not None:
                self.noise()
                if self.values["bath"] is not None and self.values["broadening"]:
                    self.spectrum()
            for key in ("taus", "se_taus"):
                if self.values[key] is not None:
                    grid = _grid(self.values[key], key)
                    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
                        raise ConfigError(f"{key} must be positive and increasing")
            if self.values["n_list"] is not None:
                self.n_list()
            self.omega_grid()
            self.window_policy()
            self.ou_params()
            self.frequency_range()
            if int(self.values["harmonics"]) < 1:
                raise ConfigError("harmonics must be >= 1")
            if not float(self.values["tolerance"]) > 0:
                raise ConfigError("tolerance must be positive")
            if not 0 <= self.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit value")
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        return self
