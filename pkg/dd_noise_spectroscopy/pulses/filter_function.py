from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .sequences import InvalidSequenceError, PulseSequence, SequenceFamily

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Max elements of the (frequency x segment) work array per chunk
_CHUNK_ELEMENTS = 1 << 22

# Below this phase omega * tau the closed form loses digits to cancellation
_CLOSED_FORM_MIN_PHASE = 1.0


@dataclass(frozen=True)
class FilterSample:
    """One sample of the filter function.

    Attributes:
        omega: Angular frequency (rad/s).
        ff: |f~_t(omega)|^2 (s^2).
        complex_value: f~_t(omega) (s).
    """

    omega: float
    ff: float
    complex_value: complex


def switching_function(
    seq: PulseSequence, t_prime: ArrayLike
) -> Union[int, np.ndarray]:
    """Sign of the accumulated phase at time t'.

    Uses the half-open convention [t_k, t_{k+1}): the value at a pulse instant
    is the value just after it. Zero outside [0, t).

    Args:
        seq: Pulse sequence.
        t_prime: Scalar or array of times.

    Returns:
        +1, -1 or 0 (same shape as ``t_prime``).
    """
    tp = np.asarray(t_prime, dtype=float)
    flips = np.searchsorted(np.asarray(seq.times), tp, side="right")
    sign = np.where(flips % 2 == 0, 1, -1)
    inside = (tp >= 0.0) & (tp < seq.readout_time)
    values = np.where(inside, sign, 0)
    if values.ndim == 0:
        return int(values)
    return values


def jump_weights(seq: PulseSequence) -> Tuple[np.ndarray, np.ndarray]:
    """Step representation f_t(t') = sum_j c_j Theta(t' - b_j).

    Returns:
        (b, c): instants 0, t_1, ..., t_n, t and jump coefficients
        +1, 2(-1)^k, -(-1)^n.
    """
    n = seq.n
    c = np.empty(n + 2)
    c[0] = 1.0
    c[1:-1] = 2.0 * (-1.0) ** np.arange(1, n + 1)
    c[-1] = -((-1.0) ** n)
    return seq.boundaries, c


def _segment_form(seq: PulseSequence, omega: np.ndarray) -> np.ndarray:
    edges = seq.boundaries
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    signs = (-1.0) ** np.arange(len(widths))
    amplitude = signs * widths

    out = np.empty(omega.shape, dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // len(widths))
    for start in range(0, omega.size, step):
        w = omega[start : start + step, None]
        # np.sinc(x) = sin(pi x) / (pi x); exact at omega = 0
        terms = amplitude * np.sinc(w * widths / (2 * np.pi)) * np.exp(1j * w * mids)
        out[start : start + step] = terms.sum(axis=1)
    return out


def _dirichlet(x: np.ndarray, n: int) -> np.ndarray:
    """sin(n x) / sin(x), evaluated stably near multiples of pi."""
    m = np.round(x / np.pi)
    delta = x - m * np.pi
    sign = np.where((m * (n - 1)) % 2 == 0, 1.0, -1.0)
    small = np.abs(delta) < 1e-8
    safe = np.where(small, 1.0, delta)
    ratio = np.where(small, float(n), np.sin(n * safe) / np.sin(safe))
    return sign * ratio


def _equidistant_form(n: int, tau: float, omega: np.ndarray) -> np.ndarray:
    # Pulses at (2k - 1) tau; the alternating pulse phases form a geometric sum
    phi = omega * tau
    psi = 2.0 * phi + np.pi
    pulses = 2.0 * np.exp(1j * phi) * np.exp(0.5j * (n - 1) * psi) * _dirichlet(
        0.5 * psi, n
    )
    ends = -1.0 + (-1.0) ** n * np.exp(2j * n * phi)
    return (ends + pulses) / (1j * omega)


def filter_transform(
    seq: PulseSequence, omega: ArrayLike
) -> Union[complex, np.ndarray]:
    """Fourier transform f~_t(omega) = int dt' exp(i omega t') f_t(t').

    Exact closed form, summed segment by segment. The value at omega = 0 is
    the signed total duration and needs no special casing. Equidistant
    sequences use an O(1) geometric-sum form away from omega = 0.

    Args:
        seq: Pulse sequence.
        omega: Scalar or array of angular frequencies.

    Returns:
        Complex scalar or array matching ``omega``.
    """
    w = np.asarray(omega, dtype=float)
    flat = np.abs(w.ravel())
    out = np.empty(flat.shape, dtype=complex)

    if seq.is_equidistant and seq.n > 0:
        fast = flat * seq.half_spacing >= _CLOSED_FORM_MIN_PHASE
        out[fast] = _equidistant_form(seq.n, seq.half_spacing, flat[fast])
        out[~fast] = _segment_form(seq, flat[~fast])
    else:
        out[:] = _segment_form(seq, flat)

    # f_t is real, so f~(-omega) is the complex conjugate
    negative = w.ravel() < 0
    out[negative] = np.conj(out[negative])
    out = out.reshape(w.shape)
    if out.ndim == 0:
        return complex(out)
    return out


def filter_function(seq: PulseSequence, omega: ArrayLike) -> Union[float, np.ndarray]:
    """Filter function |f~_t(omega)|^2."""
    value = np.abs(filter_transform(seq, omega)) ** 2
    if np.ndim(value) == 0:
        return float(value)
    return value


def filter_samples(seq: PulseSequence, omegas: Sequence[float]) -> List[FilterSample]:
    grid = np.asarray(omegas, dtype=float)
    values = np.atleast_1d(filter_transform(seq, grid))
    return [
        FilterSample(omega=float(w), ff=float(abs(v) ** 2), complex_value=complex(v))
        for w, v in zip(grid, values)
    ]


def fourier_coefficients(family: SequenceFamily, m_max: int) -> np.ndarray:
    """|C_m|^2 of the periodic switching function of an equidistant family.

    One period spans 4 tau (pulses at tau and 3 tau); the coefficient is the
    one-period transform at omega_m = m pi / (2 tau) divided by the period.

    Args:
        family: Spin echo, CPMG or APCP family.
        m_max: Largest harmonic index.

    Returns:
        np.ndarray: |C_m|^2 for m = 0, ..., m_max.

    Raises:
        InvalidSequenceError: For non-equidistant families.
    """
    if not family.is_equidistant:
        raise InvalidSequenceError(
            f"Fourier coefficients need an equidistant family, got {family.kind.value}"
        )
    if m_max < 0:
        raise ValueError(f"m_max must be non-negative, got {m_max}")
    tau = family.tau
    period = PulseSequence(times=(tau, 3 * tau), readout_time=4 * tau)
    omegas = np.arange(m_max + 1) * np.pi / (2 * tau)
    coefficients = _segment_form(period, omegas) / (4 * tau)
    return np.abs(coefficients) ** 2
