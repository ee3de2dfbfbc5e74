from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, ClassVar, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

ArrayLike = Union[float, Sequence[float], np.ndarray]


class InvalidSpectrumError(ValueError):
    """Raised when spectrum or bath parameters are invalid."""


def _require_positive(name: str, value: float) -> None:
    if not (np.isfinite(value) and value > 0):
        raise InvalidSpectrumError(f"{name} must be positive and finite, got {value}")


def x_coth(omega: np.ndarray, beta: float) -> np.ndarray:
    """omega * coth(beta omega / 2) with its limit 2 / beta at omega = 0.

    beta = inf is zero temperature, where the factor reduces to omega.
    """
    omega = np.asarray(omega, dtype=float)
    if np.isinf(beta):
        return omega.copy()
    half = 0.5 * beta * omega
    small = half < 1e-8
    safe = np.where(small, 1.0, half)
    return np.where(small, 2.0 / beta, omega / np.tanh(safe))


class NoiseSpectrum(ABC):
    """Even, nonnegative noise spectrum S(omega) in rad/s.

    Subclasses implement ``_evaluate`` on |omega|. The coherence quadrature
    relies on three hints: ``high_frequency_limit`` (the constant S tends
    to), ``cutoff`` (frequency beyond which S equals that constant exactly,
    or None) and ``breakpoints`` (points where S is not smooth).
    """

    model: ClassVar[str] = ""

    def __call__(self, omega: ArrayLike) -> Union[float, np.ndarray]:
        w = np.abs(np.asarray(omega, dtype=float))
        values = np.asarray(self._evaluate(np.atleast_1d(w)), dtype=float)
        values = values.reshape(w.shape)
        if values.ndim == 0:
            return float(values)
        return values

    @abstractmethod
    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        """Spectrum on nonnegative frequencies."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """JSON-friendly parameters."""

    @property
    def high_frequency_limit(self) -> float:
        return 0.0

    @property
    def bandwidth(self) -> float:
        """Frequency scale of the structure in S."""
        return 0.0

    @property
    def cutoff(self) -> Optional[float]:
        return None

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return ()

    def sup_above(self, omega: float) -> float:
        """Upper bound of S on [omega, inf), sampled on a log grid."""
        probes = omega * np.geomspace(1.0, 1e6, 241)
        extra = [b for b in self.breakpoints if b >= omega]
        values = self(np.concatenate((probes, extra)))
        return float(max(np.max(values), self.high_frequency_limit))

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.model, "params": self.params()}


def eval_spectrum(s: NoiseSpectrum, omega: ArrayLike) -> Union[float, np.ndarray]:
    """S(|omega|) for any spectrum model."""
    return s(omega)


@dataclass(frozen=True)
class White(NoiseSpectrum):
    s0: float

    model: ClassVar[str] = "white"

    def __post_init__(self) -> None:
        if not (np.isfinite(self.s0) and self.s0 >= 0):
            raise InvalidSpectrumError(f"s0 must be >= 0, got {self.s0}")

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        return np.full(omega.shape, self.s0)

    def params(self) -> Dict[str, Any]:
        return {"s0": self.s0}

    @property
    def high_frequency_limit(self) -> float:
        return self.s0

    @property
    def cutoff(self) -> Optional[float]:
        return 0.0

    def sup_above(self, omega: float) -> float:
        return self.s0


@dataclass(frozen=True)
class Lorentzian(NoiseSpectrum):
    """Spectrum of exponentially correlated noise sigma2 exp(-|t| / tau_c)."""

    sigma2: float
    tau_c: float

    model: ClassVar[str] = "lorentzian"

    def __post_init__(self) -> None:
        _require_positive("sigma2", self.sigma2)
        _require_positive("tau_c", self.tau_c)

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        return 2.0 * self.sigma2 * self.tau_c / (1.0 + (omega * self.tau_c) ** 2)

    def params(self) -> Dict[str, Any]:
        return {"sigma2": self.sigma2, "tau_c": self.tau_c}

    @property
    def bandwidth(self) -> float:
        return 1.0 / self.tau_c

    def sup_above(self, omega: float) -> float:
        return float(self(omega))


@dataclass(frozen=True)
class OneOverF(NoiseSpectrum):
    """A / |omega| between omega_min and omega_max, flat below and zero above."""

    amplitude: float
    omega_min: float
    omega_max: float

    model: ClassVar[str] = "one_over_f"

    def __post_init__(self) -> None:
        _require_positive("amplitude", self.amplitude)
        _require_positive("omega_min", self.omega_min)
        _require_positive("omega_max", self.omega_max)
        if self.omega_min >= self.omega_max:
            raise InvalidSpectrumError(
                f"omega_min {self.omega_min} must be below omega_max {self.omega_max}"
            )

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        values = self.amplitude / np.maximum(omega, self.omega_min)
        return np.where(omega <= self.omega_max, values, 0.0)

    def params(self) -> Dict[str, Any]:
        return {
            "amplitude": self.amplitude,
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
        }

    @property
    def bandwidth(self) -> float:
        return self.omega_max

    @property
    def cutoff(self) -> Optional[float]:
        return self.omega_max

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.omega_min, self.omega_max)

    def sup_above(self, omega: float) -> float:
        return float(self(omega)) if omega <= self.omega_max else 0.0


@dataclass(frozen=True)
class OhmicThermal(NoiseSpectrum):
    """Spin-boson spectrum for J = eta omega exp(-omega / omega_cutoff).

    S = pi J (2 n_b + 1); beta = inf is zero temperature.
    """

    eta: float
    omega_cutoff: float
    beta: float = float("inf")

    model: ClassVar[str] = "ohmic"

    def __post_init__(self) -> None:
        _require_positive("eta", self.eta)
        if not self.omega_cutoff > 0:
            raise InvalidSpectrumError(
                f"omega_cutoff must be positive, got {self.omega_cutoff}"
            )
        if not self.beta > 0:
            raise InvalidSpectrumError(f"beta must be positive, got {self.beta}")

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        decay = np.exp(-omega / self.omega_cutoff)
        return np.pi * self.eta * decay * x_coth(omega, self.beta)

    def params(self) -> Dict[str, Any]:
        return {
            "eta": self.eta,
            "omega_cutoff": self.omega_cutoff,
            "beta": None if np.isinf(self.beta) else self.beta,
        }

    @property
    def bandwidth(self) -> float:
        return self.omega_cutoff


@dataclass(frozen=True)
class BosonThermal(NoiseSpectrum):
    """Spectrum pi J(|omega|) (2 n_b + 1) of an arbitrary boson bath."""

    spectral_density: Callable[[np.ndarray], np.ndarray]
    beta: float
    scale: float = 1.0

    model: ClassVar[str] = "boson"

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        # J / omega is resolved numerically at 0, omega coth analytically
        probe = np.maximum(omega, 1e-10 * self.scale)
        ratio = np.asarray(self.spectral_density(probe), dtype=float) / probe
        return np.pi * ratio * x_coth(omega, self.beta)

    def params(self) -> Dict[str, Any]:
        raise InvalidSpectrumError(
            "Spectra built from an arbitrary J(omega) are not serializable"
        )

    @property
    def bandwidth(self) -> float:
        return self.scale


@dataclass(frozen=True)
class SpinSpinWeak(NoiseSpectrum):
    """Weak-coupling spin bath spectrum 4 pi J(|omega|) with Gaussian-smoothed modes.

    Each mode is smoothed symmetrically: the kernel at +omega_j and its mirror
    at -omega_j are summed, so on omega >= 0 every mode carries exactly
    4 pi mu_j^2 even when omega_j is within a few broadenings of zero.

    Attributes:
        modes: (omega_j, mu_j) pairs.
        broadening: Standard deviation of the unit-area Gaussian kernel.
    """

    modes: Tuple[Tuple[float, float], ...]
    broadening: float

    model: ClassVar[str] = "spin_spin_weak"

    def __post_init__(self) -> None:
        modes = tuple((float(w), float(mu)) for w, mu in self.modes)
        object.__setattr__(self, "modes", modes)
        if not modes:
            raise InvalidSpectrumError("Spin bath spectrum needs at least one mode")
        _require_positive("broadening", self.broadening)

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        centers = np.array([w for w, _ in self.modes])
        weights = 4.0 * np.pi * np.array([mu for _, mu in self.modes]) ** 2
        kernel = stats.norm.pdf(omega[..., None], centers, self.broadening)
        kernel += stats.norm.pdf(omega[..., None], -centers, self.broadening)
        return (kernel * weights).sum(axis=-1)

    def params(self) -> Dict[str, Any]:
        return {"modes": [list(m) for m in self.modes], "broadening": self.broadening}

    @property
    def bandwidth(self) -> float:
        return max(w for w, _ in self.modes) + 8.0 * self.broadening

    @property
    def cutoff(self) -> Optional[float]:
        return self.bandwidth

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        offsets = self.broadening * np.linspace(-8.0, 8.0, 17)
        points = {float(p) for w, _ in self.modes for p in w + offsets if p > 0}
        return tuple(sorted(points))


@dataclass(frozen=True)
class Tabulated(NoiseSpectrum):
    """Linear interpolation of sampled values, constant beyond the grid."""

    omegas: Tuple[float, ...]
    values: Tuple[float, ...]

    model: ClassVar[str] = "tabulated"

    def __post_init__(self) -> None:
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omegas.ndim != 1 or omegas.shape != values.shape or omegas.size < 2:
            raise InvalidSpectrumError("Tabulated spectrum needs matching 1-D grids")
        if omegas[0] < 0 or np.any(np.diff(omegas) <= 0):
            raise InvalidSpectrumError("Tabulated frequencies must increase from >= 0")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidSpectrumError("Tabulated values must be finite and >= 0")
        object.__setattr__(self, "omegas", tuple(omegas))
        object.__setattr__(self, "values", tuple(values))

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        return np.interp(omega, self.omegas, self.values)

    def params(self) -> Dict[str, Any]:
        return {"omegas": list(self.omegas), "values": list(self.values)}

    @property
    def high_frequency_limit(self) -> float:
        return self.values[-1]

    @property
    def bandwidth(self) -> float:
        return self.omegas[-1]

    @property
    def cutoff(self) -> Optional[float]:
        return self.omegas[-1]

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self.omegas

    def sup_above(self, omega: float) -> float:
        grid = np.asarray(self.omegas)
        tail = np.asarray(self.values)[grid >= omega]
        return float(max(self(omega), tail.max(initial=0.0)))


@dataclass(frozen=True)
class SumSpectrum(NoiseSpectrum):
    """Total spectrum of independent noise sources."""

    components: Tuple[NoiseSpectrum, ...]

    model: ClassVar[str] = "sum"

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise InvalidSpectrumError("Sum spectrum needs at least one component")

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        return np.sum([c(omega) for c in self.components], axis=0)

    def params(self) -> Dict[str, Any]:
        return {"components": [c.to_dict() for c in self.components]}

    @property
    def high_frequency_limit(self) -> float:
        return sum(c.high_frequency_limit for c in self.components)

    @property
    def bandwidth(self) -> float:
        return max(c.bandwidth for c in self.components)

    @property
    def cutoff(self) -> Optional[float]:
        cutoffs = [c.cutoff for c in self.components]
        if any(c is None for c in cutoffs):
            return None
        return max(cutoffs)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(sorted({b for c in self.components for b in c.breakpoints}))

    def sup_above(self, omega: float) -> float:
        return sum(c.sup_above(omega) for c in self.components)


def lorentzian_plus_white(sigma2: float, tau_c: float, s_inf: float) -> SumSpectrum:
    return SumSpectrum((Lorentzian(sigma2, tau_c), White(s_inf)))
