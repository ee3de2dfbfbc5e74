from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .models import (
    ArrayLike,
    BosonThermal,
    InvalidSpectrumError,
    NoiseSpectrum,
    OhmicThermal,
    SpinSpinWeak,
)

WEAK_COUPLING_LIMIT = 0.1


def occupation(omega: ArrayLike, beta: float) -> Union[float, np.ndarray]:
    """Bose occupation 1 / (exp(beta omega) - 1); zero at beta = inf."""
    w = np.asarray(omega, dtype=float)
    if np.isinf(beta):
        values = np.zeros_like(w)
    else:
        with np.errstate(divide="ignore"):
            values = 1.0 / np.expm1(beta * w)
    if values.ndim == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class BosonBath:
    """Harmonic bath described by its spectral density J(omega), omega >= 0.

    Attributes:
        spectral_density: Vectorized J(omega) >= 0.
        beta: Inverse temperature (hbar = 1); inf means zero temperature.
        scale: Characteristic frequency of J, used as the integration scale.
    """

    spectral_density: Callable[[np.ndarray], np.ndarray]
    beta: float = float("inf")
    scale: float = 1.0
    ohmic_params: Optional[Tuple[float, float]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise InvalidSpectrumError(f"beta must be positive, got {self.beta}")

    @classmethod
    def ohmic(
        cls, eta: float, omega_cutoff: float, beta: float = float("inf")
    ) -> "BosonBath":
        """Ohmic bath J = eta omega exp(-omega / omega_cutoff)."""
        if not (eta > 0 and omega_cutoff > 0):
            raise InvalidSpectrumError("Ohmic bath needs eta > 0 and omega_cutoff > 0")
        return cls(
            spectral_density=lambda w: eta * w * np.exp(-w / omega_cutoff),
            beta=beta,
            scale=omega_cutoff,
            ohmic_params=(eta, omega_cutoff),
        )


@dataclass(frozen=True)
class SpinBath:
    """Discrete two-level bath modes.

    Attributes:
        modes: (omega_j, mu_j) pairs, splitting and coupling in rad/s.
        weak_coupling: Assert max mu_j / omega_j <= 0.1 at construction.
    """

    modes: Tuple[Tuple[float, float], ...]
    weak_coupling: bool = False

    def __post_init__(self) -> None:
        modes = tuple((float(w), float(mu)) for w, mu in self.modes)
        object.__setattr__(self, "modes", modes)
        for w, mu in modes:
            if not (np.isfinite(w) and w > 0):
                raise InvalidSpectrumError(f"Mode splitting must be positive, got {w}")
            if not (np.isfinite(mu) and mu >= 0):
                raise InvalidSpectrumError(f"Mode coupling must be >= 0, got {mu}")
        if self.weak_coupling and self.max_coupling_ratio > WEAK_COUPLING_LIMIT:
            raise InvalidSpectrumError(
                f"Weak coupling requires mu/omega <= {WEAK_COUPLING_LIMIT}, "
                f"got {self.max_coupling_ratio}"
            )

    @classmethod
    def from_arrays(
        cls, omegas: Sequence[float], mus: Sequence[float], weak_coupling: bool = False
    ) -> "SpinBath":
        return cls(tuple(zip(omegas, mus)), weak_coupling=weak_coupling)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def couplings(self) -> np.ndarray:
        return np.array([mu for _, mu in self.modes])

    @property
    def max_coupling_ratio(self) -> float:
        if not self.modes:
            return 0.0
        return float(np.max(self.couplings / self.omegas))


def boson_to_spectrum(bath: BosonBath) -> NoiseSpectrum:
    """Noise spectrum S = pi J(|omega|) (2 n_b(|omega|) + 1) of a boson bath.

    Ohmic baths map to the serializable ``OhmicThermal`` model.
    """
    if bath.ohmic_params is not None:
        eta, omega_cutoff = bath.ohmic_params
        return OhmicThermal(eta=eta, omega_cutoff=omega_cutoff, beta=bath.beta)
    return BosonThermal(bath.spectral_density, beta=bath.beta, scale=bath.scale)


def spinbath_to_spectrum(bath: SpinBath, broadening: float) -> SpinSpinWeak:
    """Weak-coupling spectrum S = 4 pi J(|omega|), each mode smoothed by a Gaussian.

    Raises:
        InvalidSpectrumError: For an empty bath or non-positive broadening.
    """
    if not bath.modes:
        raise InvalidSpectrumError("Spin bath has no modes")
    return SpinSpinWeak(modes=bath.modes, broadening=broadening)
