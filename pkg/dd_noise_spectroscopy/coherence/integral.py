import math
from typing import Callable, Tuple

import numpy as np
from scipy import integrate

from ..pulses import PulseSequence, filter_function, jump_weights
from ..spectra import NoiseSpectrum
from ..utils.logging_config import setup_logging
from .quadrature import QuadratureError, integrate_panels

logger = setup_logging(__name__)

DEFAULT_TOLERANCE = 1e-6

_MAX_DOUBLINGS = 40


def _panel_edges(seq: PulseSequence, s: NoiseSpectrum, omega_max: float) -> np.ndarray:
    # Half-periods of the exp(i omega t) oscillation contain every filter zero
    # spacing pi / tau_min of equidistant trains as a subset
    fine = np.arange(0.0, omega_max, np.pi / seq.readout_time)
    coarse = np.arange(0.0, omega_max, np.pi / seq.min_segment)
    scales = []
    if s.bandwidth > 0:
        scales = s.bandwidth * 2.0 ** np.arange(-4, 64)
    extra = np.concatenate(
        (np.asarray(s.breakpoints, dtype=float), np.asarray(scales, dtype=float))
    )
    extra = extra[(extra > 0) & (extra < omega_max)]
    return np.unique(np.concatenate((fine, coarse, extra, [omega_max])))


def _lagged_pairs(b: np.ndarray, c: np.ndarray):
    """Yield (separation, weight product) for every pair p < q, lag by lag."""
    for lag in range(1, len(b)):
        yield b[lag:] - b[:-lag], c[lag:] * c[:-lag]


def _tail_integral(
    residual: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    c: np.ndarray,
    omega: float,
) -> Tuple[float, float]:
    """int_omega^inf R |f~|^2 with |f~|^2 = |sum_j c_j exp(i w b_j)|^2 / w^2.

    The diagonal part is integrated numerically; every cross term
    int g cos(w D) with g = R / w^2 uses its two-term asymptotic expansion.

    Returns:
        (value, error bound of the expansion).
    """

    def g(w):
        return residual(np.asarray(w, dtype=float)) / np.square(w)

    diagonal, _ = integrate.quad(g, omega, np.inf, limit=200)
    h = 1e-3 * omega
    g0 = float(g(omega))
    g1 = float((g(omega + h) - g(omega - h)) / (2 * h))
    g2 = float((g(omega + h) - 2 * g0 + g(omega - h)) / h**2)

    cross = []
    bound = []
    for distance, weight in _lagged_pairs(b, c):
        phase = omega * distance
        cross.append(
            weight
            * (-g0 * np.sin(phase) / distance - g1 * np.cos(phase) / distance**2)
        )
        bound.append(np.abs(weight) / distance**3)
    value = float(np.sum(c**2)) * diagonal + 2.0 * math.fsum(np.concatenate(cross))
    error = 2.0 * abs(g2) * math.fsum(np.concatenate(bound))
    return value, error


def coherence_exponent(
    seq: PulseSequence,
    s: NoiseSpectrum,
    tol: float = DEFAULT_TOLERANCE,
    max_panels: int = 2_000_000,
) -> float:
    """Decay exponent chi = (1/2 pi) int_0^inf S(omega) |f~_t(omega)|^2 d omega.

    The constant high-frequency part S_inf integrates analytically to
    S_inf t / 2. The remainder R = S - S_inf is integrated with adaptive
    Gauss-Kronrod panels aligned to the filter oscillations up to a
    frequency Omega; beyond Omega an asymptotic tail correction is added,
    with Omega doubled until that correction is accurate.

    Args:
        seq: Pulse sequence.
        s: Noise spectrum.
        tol: Absolute tolerance on chi.
        max_panels: Panel budget of the adaptive quadrature.

    Returns:
        float: chi >= 0 (up to the tolerance).

    Raises:
        QuadratureError: If the quadrature or the tail does not converge.
    """
    t = seq.readout_time
    s_inf = s.high_frequency_limit
    chi_white = 0.5 * s_inf * t
    cutoff = s.cutoff
    if cutoff is not None and cutoff <= 0:
        return chi_white

    def residual(w):
        return s(w) - s_inf

    def integrand(w):
        return residual(w) * filter_function(seq, w)

    # Integral-space tolerance (before the 1 / 2 pi factor)
    budget = 2 * np.pi * tol
    tail = 0.0
    if cutoff is not None:
        omega_max = float(cutoff)
    else:
        if not np.isfinite(s.bandwidth):
            raise QuadratureError(f"{s.model} spectrum has no finite bandwidth")
        b, c = jump_weights(seq)
        omega_max = max(
            16.0 * s.bandwidth,
            8.0 * np.pi / seq.min_segment,
            2.0 * max(s.breakpoints, default=0.0),
        )
        for _ in range(_MAX_DOUBLINGS):
            tail, tail_error = _tail_integral(residual, b, c, omega_max)
            if tail_error <= 0.25 * budget:
                break
            omega_max *= 2.0
        else:
            raise QuadratureError(
                f"Tail correction did not converge (last error {tail_error:.3g})"
            )

    edges = _panel_edges(seq, s, omega_max)
    result = integrate_panels(integrand, edges, tol=0.5 * budget, max_panels=max_panels)
    chi = chi_white + (result.value + tail) / (2 * np.pi)
    logger.debug(
        f"chi={chi:.10g} for n={seq.n}, t={t:g}: omega_max={omega_max:g}, "
        f"panels={result.panels}, tail={tail / (2 * np.pi):.3g}"
    )
    return chi


def coherence_integral(
    seq: PulseSequence, s: NoiseSpectrum, tol: float = DEFAULT_TOLERANCE
) -> float:
    """Normalized coherence W = exp(-chi) of a pulse sequence under Gaussian noise.

    Args:
        seq: Pulse sequence.
        s: Noise spectrum.
        tol: Absolute tolerance on the exponent.

    Returns:
        float: W in (0, 1].
    """
    chi = coherence_exponent(seq, s, tol=tol)
    return math.exp(-max(chi, 0.0))
