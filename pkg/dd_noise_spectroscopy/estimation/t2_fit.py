from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..coherence import CoherenceCurve, spin_echo_curve
from ..coherence.curves import Noise
from ..utils.logging_config import setup_logging

logger = setup_logging(__name__)

AMPLITUDE = "amplitude"
TAIL = "tail"


class T2FitRejected(RuntimeError):
    """Raised when a coherence curve does not support an exponential-tail fit."""


@dataclass(frozen=True)
class WindowPolicy:
    """Which part of a coherence curve enters the exponential fit.

    ``amplitude`` keeps points with w_lo <= W <= w_hi; ``tail`` keeps the
    last ``tail_fraction`` of the curve and fits in exponent space, for
    curves that never cross the amplitude window within the pulse budget.

    Attributes:
        w_lo: Lower coherence bound of the amplitude window.
        w_hi: Upper coherence bound of the amplitude window.
        min_points: Minimum number of points inside the window.
        min_curve_points: Minimum number of points on the whole curve.
        max_residual_rms: Rejection threshold on the ln W residuals.
        monotone_tolerance: Allowed increase of ln W between neighbours.
        mode: ``amplitude`` or ``tail``.
        tail_fraction: Share of the curve used in tail mode.
    """

    w_lo: float = 0.05
    w_hi: float = 0.5
    min_points: int = 6
    min_curve_points: int = 10
    max_residual_rms: float = 0.05
    monotone_tolerance: float = 1e-6
    mode: str = AMPLITUDE
    tail_fraction: float = 0.5

    def __post_init__(self) -> None:
        if not 0 < self.w_lo < self.w_hi < 1:
            raise ValueError(f"Need 0 < w_lo < w_hi < 1, got {self.w_lo}, {self.w_hi}")
        if self.min_points < 3:
            raise ValueError("A window needs at least three points")
        if self.mode not in (AMPLITUDE, TAIL):
            raise ValueError(f"Unknown window mode {self.mode!r}")
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must lie in (0, 1]")

    @property
    def chi_range(self) -> Tuple[float, float]:
        """Exponent interval -ln w_hi .. -ln w_lo."""
        return -np.log(self.w_hi), -np.log(self.w_lo)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w_lo": self.w_lo,
            "w_hi": self.w_hi,
            "min_points": self.min_points,
            "min_curve_points": self.min_curve_points,
            "max_residual_rms": self.max_residual_rms,
            "mode": self.mode,
            "tail_fraction": self.tail_fraction,
        }


@dataclass(frozen=True)
class T2Estimate:
    """Time constant of an exponential coherence tail.

    Attributes:
        t2: Decay time (s).
        fit_window: (t_lo, t_hi) of the fitted points.
        residual_rms: RMS residual of the ln W fit.
        stderr_t2: Standard error of t2.
        n_points: Points in the window.
        window: Window mode that produced the fit.
    """

    t2: float
    fit_window: Tuple[float, float]
    residual_rms: float
    stderr_t2: float
    n_points: int = 0
    window: str = AMPLITUDE

    def __post_init__(self) -> None:
        if not self.t2 > 0:
            raise ValueError(f"t2 must be positive, got {self.t2}")

    @property
    def rate(self) -> float:
        return 1.0 / self.t2

    @property
    def rate_stderr(self) -> float:
        return self.stderr_t2 / self.t2**2


def _select(curve: CoherenceCurve, policy: WindowPolicy) -> np.ndarray:
    if policy.mode == TAIL:
        kept = ~curve.at_floor
        if not kept.any():
            return kept
        start = curve.t[kept][0] + (1 - policy.tail_fraction) * (
            curve.t[kept][-1] - curve.t[kept][0]
        )
        return kept & (curve.t >= start)
    chi_lo, chi_hi = policy.chi_range
    return (curve.chi >= chi_lo) & (curve.chi <= chi_hi)


def fit_t2(
    curve: CoherenceCurve, window_policy: Optional[WindowPolicy] = None
) -> T2Estimate:
    """Fit ln W = a - t / T2 on the asymptotic window of a coherence curve.

    Weighted linear least squares on ln W (weights W, the inverse scatter
    of ln W for constant amplitude noise); tail mode weights every point
    equally. The standard error comes from the residual covariance.

    Args:
        curve: Coherence samples.
        window_policy: Window selection and acceptance thresholds.

    Returns:
        T2Estimate: Accepted fit.

    Raises:
        T2FitRejected: Too few points, non-monotone decay, non-decaying slope
            or residual RMS above the threshold (non-exponential tail).
    """
    policy = window_policy or WindowPolicy()
    if len(curve) < policy.min_curve_points:
        raise T2FitRejected(
            f"Curve has {len(curve)} points, need {policy.min_curve_points}"
        )
    mask = _select(curve, policy)
    count = int(mask.sum())
    if count < policy.min_points:
        raise T2FitRejected(
            f"Only {count} points in the {policy.mode} window, need {policy.min_points}"
        )

    t = curve.t[mask]
    chi = curve.chi[mask]
    if np.any(np.diff(chi) < -policy.monotone_tolerance * np.maximum(1.0, chi[:-1])):
        raise T2FitRejected("Coherence is not monotonically decaying in the window")

    ln_w = -chi
    weights = np.exp(ln_w) if policy.mode == AMPLITUDE else np.ones_like(t)
    (slope, intercept), cov = np.polyfit(t, ln_w, 1, w=weights, cov=True)
    residuals = ln_w - (slope * t + intercept)
    residual_rms = float(np.sqrt(np.mean(residuals**2)))
    if residual_rms > policy.max_residual_rms:
        raise T2FitRejected(
            f"Residual RMS {residual_rms:.3g} exceeds {policy.max_residual_rms:g}: "
            "tail is not exponential"
        )
    if not slope < 0:
        raise T2FitRejected(f"Fitted slope {slope:.3g} does not describe a decay")

    stderr_slope = float(np.sqrt(max(cov[0, 0], 0.0)))
    return T2Estimate(
        t2=float(-1.0 / slope),
        fit_window=(float(t[0]), float(t[-1])),
        residual_rms=residual_rms,
        stderr_t2=stderr_slope / slope**2,
        n_points=count,
        window=policy.mode,
    )


def t2se_to_s0(t2se: T2Estimate) -> float:
    """S(0) = 2 / T2SE from the spin-echo decay rate."""
    return 2.0 / t2se.t2


def measure_t2se(
    noise: Noise,
    taus: Sequence[float],
    window_policy: Optional[WindowPolicy] = None,
    max_workers: int = 1,
) -> T2Estimate:
    """T2SE from the asymptotic tail of a spin-echo tau sweep."""
    curve = spin_echo_curve(taus, noise, max_workers=max_workers)
    estimate = fit_t2(curve, window_policy)
    logger.info(f"T2SE={estimate.t2:.6g} from {estimate.n_points} echo points")
    return estimate
