import math
from functools import reduce

import numpy as np
from scipy.linalg import expm

from ..pulses import PulseSequence, filter_transform
from ..spectra import SpinBath

# |cos theta| at or below this counts as an exact zero of the coherence
ZERO_TOLERANCE = 1e-12

MAX_UNITARY_SPINS = 4

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_EYE = np.eye(2, dtype=complex)


def spin_spin_exact(seq: PulseSequence, bath: SpinBath) -> float:
    """Coherence prod_j |cos theta_j| of a qubit coupled to independent bath spins.

    theta_j = alpha_j gamma_j |f~_t(gamma_j)| with alpha_j = arctan(2 mu_j / omega_j)
    and gamma_j = sqrt(omega_j^2 + 4 mu_j^2).

    Args:
        seq: Pulse sequence.
        bath: Spin bath modes.

    Returns:
        float: W, exactly 0 if some |cos theta_j| vanishes within 1e-12.
    """
    if not bath.modes:
        return 1.0
    omegas, mus = bath.omegas, bath.couplings
    alpha = np.arctan2(2.0 * mus, omegas)
    gamma = np.hypot(omegas, 2.0 * mus)
    theta = alpha * gamma * np.abs(filter_transform(seq, gamma))
    cosines = np.abs(np.cos(theta))
    if np.any(cosines <= ZERO_TOLERANCE):
        return 0.0
    return math.exp(math.fsum(np.log(cosines)))


def spin_spin_gaussian(seq: PulseSequence, bath: SpinBath) -> float:
    """Weak-coupling coherence exp(-2 sum_j mu_j^2 |f~_t(omega_j)|^2)."""
    if not bath.modes:
        return 1.0
    ff = np.abs(filter_transform(seq, bath.omegas)) ** 2
    return math.exp(-2.0 * math.fsum(bath.couplings**2 * ff))


def _embed(op: np.ndarray, position: int, size: int) -> np.ndarray:
    factors = [_EYE] * size
    factors[position] = op
    return reduce(np.kron, factors)


def spin_bath_unitary(seq: PulseSequence, bath: SpinBath, beta: float = 0.0) -> float:
    """Coherence from brute-force propagation of qubit and bath spins.

    H = (1/2) sigma_z (x) sum_j 2 mu_j s_x^j + sum_j (omega_j / 2) s_z^j with
    Pauli bath operators; ideal pulses -i sigma_x on the qubit. The qubit
    starts in |+x>, the bath in its thermal state at inverse temperature beta.

    Args:
        seq: Pulse sequence.
        bath: At most four bath spins.
        beta: Bath inverse temperature; 0 is the fully mixed state.

    Returns:
        float: W = |rho_{+-}(t)| / |rho_{+-}(0)|.

    Raises:
        ValueError: For more than four bath spins.
    """
    size = len(bath.modes)
    if size > MAX_UNITARY_SPINS:
        raise ValueError(
            f"Brute-force propagation supports at most {MAX_UNITARY_SPINS} spins, "
            f"got {size}"
        )
    if size == 0:
        return 1.0

    ops = size + 1
    coupling = sum(
        2.0 * mu * _embed(_SIGMA_X, j + 1, ops) for j, (_, mu) in enumerate(bath.modes)
    )
    h_bath = sum(
        0.5 * w * _embed(_SIGMA_Z, j + 1, ops) for j, (w, _) in enumerate(bath.modes)
    )
    hamiltonian = 0.5 * _embed(_SIGMA_Z, 0, ops) @ coupling + h_bath
    pulse = -1j * _embed(_SIGMA_X, 0, ops)

    bath_dim = 2**size
    bath_energies = np.diag(h_bath).real[:bath_dim]
    populations = np.exp(-beta * (bath_energies - bath_energies.min()))
    rho_bath = np.diag(populations / populations.sum()).astype(complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    rho = np.kron(plus, rho_bath)

    propagator = np.eye(2 * bath_dim, dtype=complex)
    widths = np.diff(seq.boundaries)
    for k, width in enumerate(widths):
        if k > 0:
            propagator = pulse @ propagator
        propagator = expm(-1j * hamiltonian * width) @ propagator
    rho = propagator @ rho @ propagator.conj().T

    reduced = np.einsum("ajbj->ab", rho.reshape(2, bath_dim, 2, bath_dim))
    return float(2.0 * abs(reduced[0, 1]))
