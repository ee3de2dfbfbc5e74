from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import OptimizeResult, least_squares

from ..coherence import DEFAULT_HARMONICS, harmonic_sum
from ..spectra import (
    Lorentzian,
    NoiseSpectrum,
    OhmicThermal,
    OneOverF,
    White,
    lorentzian_plus_white,
)
from ..utils.logging_config import setup_logging
from ..utils.result_io import jsonable, write_json
from .scan import FrequencyRange, T2Scan

logger = setup_logging(__name__)

# pi^2 / 4, inverse of the first-harmonic weight 4 / pi^2
POINTWISE_FACTOR = np.pi**2 / 4.0
MIN_STARTS = 8
MIN_HARMONICS = 10
MAX_RELATIVE_RMS = 0.2


class SpectrumFitError(RuntimeError):
    """Raised when no optimizer start reaches an acceptable residual."""


@dataclass(frozen=True)
class PointEstimate:
    """Pointwise spectrum estimate S(pi / 2 tau) = (pi^2 / 4) / T2L."""

    omega: float
    s_hat: float
    stderr: float
    in_range: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "s_hat": self.s_hat,
            "stderr": self.stderr,
            "in_range": self.in_range,
        }


def pointwise_reconstruct(scan: T2Scan) -> List[PointEstimate]:
    """First-harmonic inversion of every scan entry.

    Overestimates S wherever the higher odd harmonics still carry weight,
    e.g. by pi^2 / 8 for a flat spectrum.
    """
    if not len(scan):
        raise ValueError("Scan is empty")
    return [
        PointEstimate(
            omega=float(entry.omega),
            s_hat=float(POINTWISE_FACTOR * entry.t2l.rate),
            stderr=float(POINTWISE_FACTOR * entry.t2l.rate_stderr),
            in_range=entry.in_range,
        )
        for entry in scan.entries
    ]


@dataclass(frozen=True)
class _Scales:
    omega_lo: float
    omega_hi: float
    s_lo: float
    s_hi: float


Bounds = Dict[str, Tuple[float, float]]


@dataclass(frozen=True)
class FitFamily:
    """Parametric spectrum family fitted in log-parameter space.

    Attributes:
        name: Family name used in configs and outputs.
        param_names: Fitted parameters, all positive.
        build: Spectrum from fitted and fixed parameters.
        default_bounds: Parameter box derived from the data scales.
        default_fixed: Fixed parameters derived from the data scales.
    """

    name: str
    param_names: Tuple[str, ...]
    build: Callable[[Dict[str, float]], NoiseSpectrum]
    default_bounds: Callable[[_Scales, Dict[str, float]], Bounds]
    default_fixed: Callable[[_Scales], Dict[str, float]] = field(
        default=lambda scales: {}
    )


def _thermal_floor(fixed: Mapping[str, float]) -> float:
    beta = fixed.get("beta", float("inf"))
    return 0.0 if beta is None or np.isinf(beta) else 2.0 / beta


def _ohmic_bounds(sc: _Scales, fixed: Dict[str, float]) -> Bounds:
    floor = _thermal_floor(fixed)
    return {
        "eta": (
            1e-3 * sc.s_lo / (np.pi * max(sc.omega_hi, floor)),
            1e3 * sc.s_hi / (np.pi * max(sc.omega_lo, floor)),
        ),
        "omega_cutoff": (0.1 * sc.omega_lo, 100.0 * sc.omega_hi),
    }


FIT_FAMILIES: Dict[str, FitFamily] = {
    "white": FitFamily(
        name="white",
        param_names=("s0",),
        build=lambda p: White(p["s0"]),
        default_bounds=lambda sc, fx: {"s0": (1e-2 * sc.s_lo, 1e2 * sc.s_hi)},
    ),
    "lorentzian": FitFamily(
        name="lorentzian",
        param_names=("sigma2", "tau_c"),
        build=lambda p: Lorentzian(p["sigma2"], p["tau_c"]),
        default_bounds=lambda sc, fx: {
            "sigma2": (1e-2 * sc.s_lo * sc.omega_lo, 1e2 * sc.s_hi * sc.omega_hi),
            "tau_c": (1e-2 / sc.omega_hi, 1e2 / sc.omega_lo),
        },
    ),
    "lorentzian_white": FitFamily(
        name="lorentzian_white",
        param_names=("sigma2", "tau_c", "s_inf"),
        build=lambda p: lorentzian_plus_white(p["sigma2"], p["tau_c"], p["s_inf"]),
        default_bounds=lambda sc, fx: {
            "sigma2": (1e-2 * sc.s_lo * sc.omega_lo, 1e2 * sc.s_hi * sc.omega_hi),
            "tau_c": (1e-2 / sc.omega_hi, 1e2 / sc.omega_lo),
            "s_inf": (1e-3 * sc.s_lo, sc.s_hi),
        },
    ),
    "one_over_f": FitFamily(
        name="one_over_f",
        param_names=("amplitude",),
        build=lambda p: OneOverF(p["amplitude"], p["omega_min"], p["omega_max"]),
        default_bounds=lambda sc, fx: {
            "amplitude": (1e-2 * sc.s_lo * sc.omega_lo, 1e2 * sc.s_hi * sc.omega_hi)
        },
        default_fixed=lambda sc: {
            "omega_min": 0.1 * sc.omega_lo,
            "omega_max": 1e3 * sc.omega_hi,
        },
    ),
    "ohmic": FitFamily(
        name="ohmic",
        param_names=("eta", "omega_cutoff"),
        build=lambda p: OhmicThermal(
            p["eta"],
            p["omega_cutoff"],
            float("inf") if p.get("beta") is None else p["beta"],
        ),
        default_bounds=_ohmic_bounds,
        default_fixed=lambda sc: {"beta": float("inf")},
    ),
}


@dataclass(frozen=True)
class ReconstructionResult:
    """Pointwise estimates plus the refined harmonic-sum fit of one scan."""

    points: Tuple[PointEstimate, ...]
    model: str
    spectrum: NoiseSpectrum
    params: Dict[str, float]
    fixed: Dict[str, float]
    param_stderr: Dict[str, float]
    covariance: np.ndarray
    L: int
    freq_range: Tuple[float, float]
    residual_rms: float
    objective: float
    seed: int
    starts: Tuple[Dict[str, float], ...]
    best_start: int
    at_bound: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return jsonable(
            {
                "points": [p.to_dict() for p in self.points],
                "model": self.model,
                "spectrum": self.spectrum.to_dict(),
                "params": self.params,
                "fixed": self.fixed,
                "param_stderr": self.param_stderr,
                "covariance": self.covariance,
                "L": self.L,
                "freq_range": list(self.freq_range),
                "residual_rms": self.residual_rms,
                "objective": self.objective,
                "seed": self.seed,
                "starts": list(self.starts),
                "best_start": self.best_start,
                "at_bound": list(self.at_bound),
            }
        )

    def to_json(
        self, path: Path, provenance: Optional[Mapping[str, Any]] = None
    ) -> Path:
        payload = self.to_dict()
        if provenance:
            payload["provenance"] = jsonable(dict(provenance))
        return write_json(payload, path)


def _scales(scan: T2Scan) -> _Scales:
    omegas = scan.omegas
    s_hat = POINTWISE_FACTOR * scan.rates
    return _Scales(
        omega_lo=float(omegas.min()),
        omega_hi=float(omegas.max()),
        s_lo=float(s_hat.min()),
        s_hi=float(s_hat.max()),
    )


def _sigmas(scan: T2Scan) -> np.ndarray:
    stderr = scan.rate_stderr
    if np.all(np.isfinite(stderr)) and np.all(stderr > 0):
        return stderr
    # No usable uncertainties: relative residuals
    return scan.rates


def fit_spectrum(
    scan: T2Scan,
    model: str,
    L: int = DEFAULT_HARMONICS,
    n_starts: int = MIN_STARTS,
    seed: int = 0,
    bounds: Optional[Mapping[str, Tuple[float, float]]] = None,
    fixed: Optional[Mapping[str, float]] = None,
    frequency_range: Optional[FrequencyRange] = None,
    max_relative_rms: float = MAX_RELATIVE_RMS,
    max_workers: int = 4,
) -> ReconstructionResult:
    """Fit the harmonic-sum forward model to the measured rates 1 / T2L.

    Minimizes sum_k ((1/T2L_k - F_k(theta)) / sigma_k)^2 with bounded
    trust-region least squares in log-parameter space. sigma_k is the rate
    standard error, or the rate itself when the scan carries none. Starts
    are the centre of the log box plus ``n_starts`` log-uniform draws; the
    best start is chosen by (cost, start index).

    Args:
        scan: Accepted T2L entries.
        model: Name of a family in ``FIT_FAMILIES``.
        L: Harmonic cutoff of the forward model, at least 10.
        n_starts: Random starts, at least 8.
        seed: Seed of the start generator.
        bounds: Per-parameter (lo, hi) overriding the data-driven box.
        fixed: Values of the family's fixed parameters.
        frequency_range: Measurement window reported with the result.
        max_relative_rms: Acceptance threshold on the relative rate residuals.
        max_workers: Threads for the optimizer starts.

    Returns:
        ReconstructionResult: Best fit with covariance and pointwise estimates.

    Raises:
        ValueError: Unknown model, too few entries, L < 10 or bad bounds.
        SpectrumFitError: The best start misses the residual threshold.
    """
    if model not in FIT_FAMILIES:
        raise ValueError(f"Unknown model {model!r}; choose from {sorted(FIT_FAMILIES)}")
    family = FIT_FAMILIES[model]
    p = len(family.param_names)
    if len(scan) < 2 * p:
        raise ValueError(
            f"{model} has {p} parameters and needs >= {2 * p} scan entries, "
            f"got {len(scan)}"
        )
    if L < MIN_HARMONICS:
        raise ValueError(f"Harmonic cutoff must be >= {MIN_HARMONICS}, got {L}")
    if n_starts < MIN_STARTS:
        raise ValueError(f"Need at least {MIN_STARTS} starts, got {n_starts}")

    scales = _scales(scan)
    fixed_params = {**family.default_fixed(scales), **dict(fixed or {})}
    box = {**family.default_bounds(scales, fixed_params), **dict(bounds or {})}
    lo = np.log([box[name][0] for name in family.param_names])
    hi = np.log([box[name][1] for name in family.param_names])
    if not np.all(np.isfinite(lo) & np.isfinite(hi) & (lo < hi)):
        raise ValueError(f"Invalid parameter bounds {box}")

    taus = scan.taus
    rates = scan.rates
    sigmas = _sigmas(scan)

    def spectrum_at(log_theta: np.ndarray) -> NoiseSpectrum:
        values = dict(zip(family.param_names, np.exp(log_theta).tolist()))
        return family.build({**fixed_params, **values})

    def residuals(log_theta: np.ndarray) -> np.ndarray:
        forward = harmonic_sum(spectrum_at(log_theta), taus, L)
        return (rates - forward) / sigmas

    rng = np.random.default_rng(seed)
    starts = np.vstack([0.5 * (lo + hi), rng.uniform(lo, hi, size=(n_starts, p))])

    def run(x0: np.ndarray) -> Optional[OptimizeResult]:
        try:
            return least_squares(
                residuals,
                x0,
                bounds=(lo, hi),
                method="trf",
                ftol=1e-12,
                xtol=1e-12,
                gtol=1e-12,
            )
        except (ValueError, FloatingPointError) as e:
            logger.warning(f"Optimizer start failed: {e}")
            return None

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        outcomes = list(executor.map(run, starts))

    ranked = sorted(
        (float(r.cost), index)
        for index, r in enumerate(outcomes)
        if r is not None and np.isfinite(r.cost)
    )
    if not ranked:
        raise SpectrumFitError(f"Every start of the {model} fit failed")
    best_index = ranked[0][1]
    best = outcomes[best_index]

    forward = harmonic_sum(spectrum_at(best.x), taus, L)
    relative_rms = float(np.sqrt(np.mean(((rates - forward) / rates) ** 2)))
    if relative_rms > max_relative_rms:
        raise SpectrumFitError(
            f"{model} fit leaves relative RMS {relative_rms:.3g} "
            f"(threshold {max_relative_rms:g}) after {len(starts)} starts"
        )

    theta = np.exp(best.x)
    dof = len(scan) - p
    s2 = 2.0 * best.cost / dof if dof > 0 else 1.0
    log_cov = np.linalg.pinv(best.jac.T @ best.jac) * s2
    covariance = log_cov * np.outer(theta, theta)
    stderr = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    width = hi - lo
    pinned = (np.abs(best.x - lo) < 1e-6 * width) | (
        np.abs(hi - best.x) < 1e-6 * width
    )
    at_bound = tuple(name for name, flag in zip(family.param_names, pinned) if flag)
    if at_bound:
        logger.warning(f"{model} fit parameters at their bounds: {list(at_bound)}")

    if frequency_range is not None:
        freq_range = (frequency_range.omega_lo, frequency_range.omega_hi)
    else:
        freq_range = (scales.omega_lo, scales.omega_hi)

    params = dict(zip(family.param_names, theta.tolist()))
    logger.info(
        f"{model} fit: {params} (relative RMS {relative_rms:.3g}, "
        f"start {best_index} of {len(starts)})"
    )
    return ReconstructionResult(
        points=tuple(pointwise_reconstruct(scan)),
        model=model,
        spectrum=spectrum_at(best.x),
        params=params,
        fixed=fixed_params,
        param_stderr=dict(zip(family.param_names, stderr.tolist())),
        covariance=covariance,
        L=L,
        freq_range=freq_range,
        residual_rms=relative_rms,
        objective=float(2.0 * best.cost),
        seed=seed,
        starts=tuple(
            dict(zip(family.param_names, np.exp(x).tolist())) for x in starts
        ),
        best_start=best_index,
        at_bound=at_bound,
    )


def fit_objective(
    scan: T2Scan,
    spectrum: NoiseSpectrum,
    L: int = DEFAULT_HARMONICS,
) -> float:
    """Weighted sum of squared rate residuals of a given spectrum."""
    forward = harmonic_sum(spectrum, scan.taus, L)
    return float(np.sum(((scan.rates - forward) / _sigmas(scan)) ** 2))
