from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import polygamma

from ..pulses import InvalidSequenceError, SequenceFamily
from ..spectra import NoiseSpectrum

DEFAULT_HARMONICS = 25


@dataclass(frozen=True)
class DecayRate:
    """Asymptotic decay rate 1/T2L of an equidistant pulse train.

    Attributes:
        rate: 1/T2L (1/s).
        tau: Half-spacing (s).
        harmonics_used: Harmonic cutoff L.
        tail_bound: Upper bound on the neglected harmonics l > L.
    """

    rate: float
    tau: float
    harmonics_used: int
    tail_bound: float

    @property
    def t2l(self) -> float:
        return 1.0 / self.rate if self.rate > 0 else float("inf")


def harmonic_sum(
    s: NoiseSpectrum, taus: Union[float, Sequence[float], np.ndarray], L: int
) -> Union[float, np.ndarray]:
    """F(pi / 2 tau) = (4 / pi^2) sum_{l=0}^{L} S((2l+1) pi / 2 tau) / (2l+1)^2.

    Shared by the rate prediction and the spectrum fit.
    """
    tau = np.asarray(taus, dtype=float)
    odd = 2.0 * np.arange(L + 1) + 1.0
    omegas = np.multiply.outer(np.pi / (2.0 * tau), odd)
    values = (4.0 / np.pi**2) * (np.asarray(s(omegas)) / odd**2).sum(axis=-1)
    if values.ndim == 0:
        return float(values)
    return values


def odd_harmonic_tail(L: int) -> float:
    """sum_{l>L} 1 / (2l+1)^2 = psi'(L + 3/2) / 4."""
    return 0.25 * float(polygamma(1, L + 1.5))


def asymptotic_rate(
    family: SequenceFamily, s: NoiseSpectrum, L: int = DEFAULT_HARMONICS
) -> DecayRate:
    """Long-train decay rate from the odd-harmonic comb of an equidistant sequence.

    Args:
        family: Spin echo, CPMG or APCP family (only tau matters).
        s: Noise spectrum.
        L: Harmonic cutoff, at least 1.

    Returns:
        DecayRate: The truncated sum with its tail bound
        (4 / pi^2) max_{omega > omega_L} S(omega) sum_{l>L} (2l+1)^-2.

    Raises:
        InvalidSequenceError: For non-equidistant families.
        ValueError: If L < 1.
    """
    if not family.is_equidistant:
        raise InvalidSequenceError(
            f"Asymptotic rate needs an equidistant family, got {family.kind.value}"
        )
    if L < 1:
        raise ValueError(f"Harmonic cutoff must be >= 1, got {L}")
    tau = family.tau
    rate = harmonic_sum(s, tau, L)
    s_max = s.sup_above((2 * L + 3) * np.pi / (2 * tau))
    tail = (4.0 / np.pi**2) * s_max * odd_harmonic_tail(L)
    return DecayRate(rate=float(rate), tau=tau, harmonics_used=L, tail_bound=tail)
