from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.signal import lfilter

from ..spectra import Lorentzian

MIN_TRAJECTORIES = 100

# Largest number of samples generated in one array
MAX_SAMPLES = 50_000_000


class InvalidProcessError(ValueError):
    """Raised for invalid Ornstein-Uhlenbeck or Monte Carlo parameters."""


@dataclass(frozen=True)
class OUProcessParams:
    """Stationary Ornstein-Uhlenbeck noise with correlation sigma2 exp(-|t| / tau_c).

    Attributes:
        sigma2: Variance (rad^2/s^2).
        tau_c: Correlation time (s).
        seed: Root seed of all random streams, 0 <= seed < 2^64.
        dt: Integration step (s), at most tau_c / 10.
        n_traj: Number of trajectories, at least 100.
    """

    sigma2: float
    tau_c: float
    seed: int = 0
    dt: float = 0.01
    n_traj: int = 10_000

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise InvalidProcessError(f"sigma2 must be positive, got {self.sigma2}")
        if not (np.isfinite(self.tau_c) and self.tau_c > 0):
            raise InvalidProcessError(f"tau_c must be positive, got {self.tau_c}")
        if not self.dt > 0:
            raise InvalidProcessError(f"dt must be positive, got {self.dt}")
        if self.dt > self.tau_c / 10 * (1 + 1e-12):
            raise InvalidProcessError(
                f"dt={self.dt} must not exceed tau_c/10={self.tau_c / 10}"
            )
        if int(self.n_traj) < MIN_TRAJECTORIES:
            raise InvalidProcessError(
                f"n_traj must be at least {MIN_TRAJECTORIES}, got {self.n_traj}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidProcessError("seed must be an unsigned 64-bit value")
        object.__setattr__(self, "n_traj", int(self.n_traj))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def spectrum(self) -> Lorentzian:
        return Lorentzian(self.sigma2, self.tau_c)

    @property
    def decay(self) -> float:
        """One-step autocorrelation exp(-dt / tau_c)."""
        return float(np.exp(-self.dt / self.tau_c))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma2": self.sigma2,
            "tau_c": self.tau_c,
            "seed": self.seed,
            "dt": self.dt,
            "n_traj": self.n_traj,
        }


def grid_steps(t_end: float, dt: float) -> int:
    return int(np.ceil(t_end / dt - 1e-9))


def ou_from_normals(params: OUProcessParams, normals: np.ndarray) -> np.ndarray:
    """Exact OU recursion driven by standard normals along the last axis.

    xi_0 = sigma eta_0 and xi_{k+1} = a xi_k + sigma sqrt(1 - a^2) eta_{k+1}
    with a = exp(-dt / tau_c).
    """
    a = params.decay
    sigma = np.sqrt(params.sigma2)
    innovations = sigma * np.sqrt(-np.expm1(-2.0 * params.dt / params.tau_c)) * normals
    innovations[..., 0] = sigma * normals[..., 0]
    return lfilter([1.0], [1.0, -a], innovations, axis=-1)


def generate_ou(
    params: OUProcessParams,
    t_end: float,
    n_paths: int = 1,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Sample OU trajectories on the grid 0, dt, ..., K dt with K dt >= t_end.

    Args:
        params: Process parameters; ``params.seed`` drives the default generator.
        t_end: Final time (s).
        n_paths: Number of independent trajectories.
        rng: Optional generator overriding the seeded default.

    Returns:
        np.ndarray: Shape (n_paths, K + 1).

    Raises:
        InvalidProcessError: If the grid exceeds the sample budget.
    """
    if not t_end > 0:
        raise InvalidProcessError(f"t_end must be positive, got {t_end}")
    steps = grid_steps(t_end, params.dt)
    if n_paths * (steps + 1) > MAX_SAMPLES:
        raise InvalidProcessError(
            f"{n_paths} x {steps + 1} samples exceed the budget of {MAX_SAMPLES}"
        )
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(params.seed)))
    normals = rng.standard_normal((n_paths, steps + 1))
    return ou_from_normals(params, normals)
