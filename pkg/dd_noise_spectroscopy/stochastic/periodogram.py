import numpy as np
from scipy import signal

from ..spectra import Tabulated
from ..utils.logging_config import setup_logging
from .ou_process import MAX_SAMPLES, InvalidProcessError, OUProcessParams, generate_ou

logger = setup_logging(__name__)

MIN_RECORD_CORRELATION_TIMES = 50.0
SEGMENT_CORRELATION_TIMES = 40.0


def sampled_ou_spectrum(params: OUProcessParams, omega: np.ndarray) -> np.ndarray:
    """Density of the OU process sampled every dt.

    P(omega) = sigma2 dt (1 - a^2) / (1 - 2 a cos(omega dt) + a^2) with
    a = exp(-dt / tau_c). Equals the continuous Lorentzian folded over all
    aliases, sum_k S(omega + 2 pi k / dt).
    """
    a = params.decay
    omega = np.asarray(omega, dtype=float)
    denominator = 1.0 - 2.0 * a * np.cos(omega * params.dt) + a**2
    return params.sigma2 * params.dt * (1.0 - a**2) / denominator


def estimate_spectrum_from_trajectories(
    params: OUProcessParams, t_end: float
) -> Tabulated:
    """Welch estimate of S(omega) = int dt exp(i omega t) <xi(t) xi(0)>.

    Averages Hann-windowed two-sided periodograms (segments of about
    40 tau_c, half overlap, no detrending) over ``params.n_traj``
    trajectories. The sampled record only sees the aliased density, so the
    two-sided estimate P(f) is rescaled by S(omega) / P_sampled(omega) at
    omega = 2 pi f to recover the continuous-time spectrum up to Nyquist.

    Args:
        params: OU parameters and seed.
        t_end: Record length per trajectory, at least 50 tau_c.

    Returns:
        Tabulated: Estimate on omega >= 0.

    Raises:
        InvalidProcessError: If the record is shorter than 50 tau_c.
    """
    if t_end < MIN_RECORD_CORRELATION_TIMES * params.tau_c:
        raise InvalidProcessError(
            f"t_end={t_end} is shorter than {MIN_RECORD_CORRELATION_TIMES:g} tau_c"
        )
    samples = int(np.ceil(t_end / params.dt)) + 1
    segment = SEGMENT_CORRELATION_TIMES * params.tau_c / params.dt
    nperseg = min(samples, int(2 ** np.ceil(np.log2(segment))))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(params.seed)))
    per_batch = max(1, min(params.n_traj, MAX_SAMPLES // (4 * samples)))

    total = None
    done = 0
    while done < params.n_traj:
        count = min(per_batch, params.n_traj - done)
        xi = generate_ou(params, t_end, n_paths=count, rng=rng)
        freqs, density = signal.welch(
            xi,
            fs=1.0 / params.dt,
            window="hann",
            nperseg=nperseg,
            detrend=False,
            return_onesided=False,
            scaling="density",
            axis=-1,
        )
        batch_sum = density.sum(axis=0)
        total = batch_sum if total is None else total + batch_sum
        done += count

    density = total / params.n_traj
    order = np.argsort(freqs)
    freqs, density = freqs[order], density[order]
    keep = freqs >= 0
    omegas = 2 * np.pi * freqs[keep]
    correction = params.spectrum(omegas) / sampled_ou_spectrum(params, omegas)
    values = density[keep] * correction
    logger.info(
        f"Welch estimate from {params.n_traj} trajectories, "
        f"{nperseg}-sample segments"
    )
    return Tabulated(omegas=tuple(omegas), values=tuple(values))
