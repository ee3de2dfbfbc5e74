from .monte_carlo import MCEstimate, mc_coherence, phase_weights
from .ou_process import InvalidProcessError, OUProcessParams, generate_ou
from .periodogram import estimate_spectrum_from_trajectories, sampled_ou_spectrum

__all__ = [
    "InvalidProcessError",
    "MCEstimate",
    "OUProcessParams",
    "estimate_spectrum_from_trajectories",
    "generate_ou",
    "mc_coherence",
    "phase_weights",
    "sampled_ou_spectrum",
]
