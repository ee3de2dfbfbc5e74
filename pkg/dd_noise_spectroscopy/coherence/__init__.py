from .asymptotic import (
    DEFAULT_HARMONICS,
    DecayRate,
    asymptotic_rate,
    harmonic_sum,
    odd_harmonic_tail,
)
from .curves import CHI_MAX, CoherenceCurve, coherence_curve, spin_echo_curve
from .integral import DEFAULT_TOLERANCE, coherence_exponent, coherence_integral
from .quadrature import QuadratureError, integrate_panels
from .spin_bath import spin_bath_unitary, spin_spin_exact, spin_spin_gaussian

__all__ = [
    "CHI_MAX",
    "DEFAULT_HARMONICS",
    "DEFAULT_TOLERANCE",
    "CoherenceCurve",
    "DecayRate",
    "QuadratureError",
    "asymptotic_rate",
    "coherence_curve",
    "coherence_exponent",
    "coherence_integral",
    "harmonic_sum",
    "integrate_panels",
    "odd_harmonic_tail",
    "spin_bath_unitary",
    "spin_echo_curve",
    "spin_spin_exact",
    "spin_spin_gaussian",
]
