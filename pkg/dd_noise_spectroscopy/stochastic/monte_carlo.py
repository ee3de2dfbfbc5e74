import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..pulses import PulseSequence
from ..utils.logging_config import setup_logging
from .ou_process import (
    MAX_SAMPLES,
    InvalidProcessError,
    OUProcessParams,
    ou_from_normals,
)

logger = setup_logging(__name__)

MIN_BATCHES = 20


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo coherence estimate |<exp(i phi)>|.

    Attributes:
        W_hat: Estimated coherence.
        stderr: Batch-means standard error of W_hat.
        n_traj: Trajectory count.
        phase_variance: Sample variance of the accumulated phase.
        batches: Number of batches behind ``stderr``.
        seed: Root seed.
        pulse_times: Pulse instants after snapping to the dt grid.
    """

    W_hat: float
    stderr: float
    n_traj: int
    phase_variance: float
    batches: int
    seed: int
    pulse_times: Tuple[float, ...]

    @property
    def gaussian_prediction(self) -> float:
        """exp(-Var(phi) / 2), exact for Gaussian phases."""
        return math.exp(-0.5 * self.phase_variance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "W_hat": self.W_hat,
            "stderr": self.stderr,
            "n_traj": self.n_traj,
            "phase_variance": self.phase_variance,
            "batches": self.batches,
            "seed": self.seed,
            "pulse_times": list(self.pulse_times),
        }


def phase_weights(seq: PulseSequence, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Trapezoid weights w_k with phi = sum_k w_k xi(k dt).

    Pulses are snapped to the nearest grid point (timing error <= dt / 2),
    so the switching function is constant on every grid interval.

    Returns:
        (weights of length K + 1, snapped pulse indices)

    Raises:
        InvalidProcessError: If the readout is off-grid or snapped pulses collide.
    """
    steps = int(round(seq.readout_time / dt))
    off_grid = abs(steps * dt - seq.readout_time) > 1e-9 * max(1.0, seq.readout_time)
    if steps < 1 or off_grid:
        raise InvalidProcessError(
            f"Readout {seq.readout_time} is not on the dt={dt} grid"
        )
    indices = np.rint(np.asarray(seq.times) / dt).astype(int)
    if indices.size and (
        indices[0] < 1 or indices[-1] > steps - 1 or np.any(np.diff(indices) < 1)
    ):
        raise InvalidProcessError(f"Pulses collide on the dt={dt} grid")

    # Interval k spans [k dt, (k + 1) dt]
    flips = np.searchsorted(indices, np.arange(steps), side="right")
    segment = np.where(flips % 2 == 0, 1.0, -1.0)
    padded = np.concatenate(([0.0], segment, [0.0]))
    weights = 0.5 * dt * (padded[:-1] + padded[1:])
    return weights, indices


def _batch_phases(
    params: OUProcessParams,
    weights: np.ndarray,
    streams: Sequence[np.random.SeedSequence],
) -> np.ndarray:
    normals = np.empty((len(streams), weights.size))
    for row, stream in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(stream))
        normals[row] = rng.standard_normal(weights.size)
    xi = ou_from_normals(params, normals)
    # Row-wise reductions keep every phase independent of the batch layout
    return (xi * weights).sum(axis=1)


def mc_coherence(
    seq: PulseSequence,
    params: OUProcessParams,
    batches: int = MIN_BATCHES,
    max_workers: int = 4,
) -> MCEstimate:
    """Monte Carlo estimate of W = |<exp(i phi)>| under OU noise.

    Each trajectory draws from its own Philox stream spawned from
    ``params.seed``, so the estimate does not depend on thread or batch
    layout. The standard error uses batch means projected onto the
    direction of the overall mean.

    Args:
        seq: Pulse sequence whose readout lies on the dt grid.
        params: OU parameters.
        batches: Number of batches for the standard error, at least 20.
        max_workers: Threads for batch evaluation.

    Returns:
        MCEstimate: Coherence estimate with its standard error.

    Raises:
        InvalidProcessError: Too few batches, off-grid readout or colliding pulses.
    """
    if batches < MIN_BATCHES or batches > params.n_traj:
        raise InvalidProcessError(
            f"Need between {MIN_BATCHES} and n_traj batches, got {batches}"
        )
    weights, indices = phase_weights(seq, params.dt)
    if (params.n_traj // batches + 1) * weights.size > MAX_SAMPLES:
        raise InvalidProcessError("Trajectory batch exceeds the sample budget")

    streams = np.random.SeedSequence(params.seed).spawn(params.n_traj)
    bounds = np.linspace(0, params.n_traj, batches + 1).astype(int)
    chunks = [streams[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        phases: List[np.ndarray] = list(
            executor.map(lambda chunk: _batch_phases(params, weights, chunk), chunks)
        )

    all_phases = np.concatenate(phases)
    mean = complex(
        math.fsum(np.cos(all_phases)), math.fsum(np.sin(all_phases))
    ) / params.n_traj
    w_hat = abs(mean)
    direction = mean / w_hat if w_hat > 0 else 1.0

    batch_means = np.array([np.exp(1j * p).mean() for p in phases])
    projected = (batch_means * np.conj(direction)).real
    stderr = float(np.std(projected, ddof=1) / np.sqrt(batches))
    stderr = max(stderr, np.finfo(float).eps)

    centered = all_phases - math.fsum(all_phases) / params.n_traj
    variance = math.fsum(centered**2) / (params.n_traj - 1)

    logger.info(
        f"MC n={seq.n}, t={seq.readout_time:g}: W_hat={w_hat:.6f} +/- {stderr:.2g}"
    )
    return MCEstimate(
        W_hat=float(w_hat),
        stderr=stderr,
        n_traj=params.n_traj,
        phase_variance=float(variance),
        batches=batches,
        seed=params.seed,
        pulse_times=tuple(float(i * params.dt) for i in indices),
    )
