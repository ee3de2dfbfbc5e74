import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..pulses import InvalidSequenceError, SequenceFamily, make_sequence
from ..spectra import NoiseSpectrum, SpinBath
from ..utils.logging_config import setup_logging
from ..utils.result_io import read_csv, write_csv
from .integral import DEFAULT_TOLERANCE, coherence_exponent
from .spin_bath import spin_spin_exact

logger = setup_logging(__name__)

Noise = Union[NoiseSpectrum, SpinBath]

# Rounding slack allowed below chi = 0
_CHI_FLOOR = -1e-9

# Largest exponent whose W is still a positive double
CHI_MAX = -math.log(sys.float_info.min)


@dataclass(frozen=True)
class CoherenceCurve:
    """Sampled decay exponent chi(t) = -ln W(t) of one protocol.

    Stored in exponent space so long times never underflow.

    Attributes:
        t: Readout times (s), strictly increasing.
        chi: Decay exponents, clipped to [0, CHI_MAX] so that W stays in (0, 1];
            clipped points are reported by ``at_floor``.
        protocol: Description of the sequence family and noise source.
        n: Pulse count of each point, when known.
    """

    t: np.ndarray
    chi: np.ndarray
    protocol: Dict[str, Any] = field(default_factory=dict, compare=False)
    n: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        chi = np.asarray(self.chi, dtype=float)
        if t.ndim != 1 or t.shape != chi.shape:
            raise ValueError("Coherence curve needs matching 1-D t and chi arrays")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("Coherence curve times must be positive and increasing")
        if np.any(chi < _CHI_FLOOR) or not np.all(np.isfinite(chi)):
            raise ValueError("Decay exponents must be finite and non-negative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "chi", np.clip(chi, 0.0, CHI_MAX))
        if self.n is not None:
            object.__setattr__(self, "n", np.asarray(self.n, dtype=int))

    def __len__(self) -> int:
        return self.t.size

    @property
    def W(self) -> np.ndarray:
        return np.exp(-self.chi)

    @property
    def at_floor(self) -> np.ndarray:
        """Points whose coherence underflowed and were stored at CHI_MAX."""
        return self.chi >= CHI_MAX

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.t.tolist(), self.W.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "W": self.W, "chi": self.chi})

    def to_csv(self, path: Path, header: Optional[Mapping[str, Any]] = None) -> Path:
        return write_csv(self.to_frame(), path, header)

    @classmethod
    def from_csv(cls, path: Path) -> "CoherenceCurve":
        frame, header = read_csv(path)
        return cls(
            t=frame["t"].to_numpy(), chi=frame["chi"].to_numpy(), protocol=header
        )


def _protocol(family: SequenceFamily, noise: Noise) -> Dict[str, Any]:
    if isinstance(noise, SpinBath):
        source: Dict[str, Any] = {"spin_bath": [list(m) for m in noise.modes]}
    else:
        source = noise.to_dict()
    return {"sequence": family.to_dict(), "noise": source}


def _exponent(family: SequenceFamily, noise: Noise, tol: float) -> float:
    seq = make_sequence(family)
    if isinstance(noise, SpinBath):
        w = spin_spin_exact(seq, noise)
        if w == 0.0:
            logger.warning(f"Coherence vanishes at t={seq.readout_time:g}")
            return CHI_MAX
        return -math.log(w)
    return coherence_exponent(seq, noise, tol=tol)


def _evaluate(
    families: Sequence[SequenceFamily], noise: Noise, tol: float, max_workers: int
) -> np.ndarray:
    # Results are placed by index, so completion order never matters
    if max_workers <= 1 or len(families) == 1:
        return np.array([_exponent(f, noise, tol) for f in families])
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        chi = executor.map(lambda f: _exponent(f, noise, tol), families)
        return np.array(list(chi))


def coherence_curve(
    family: SequenceFamily,
    noise: Noise,
    n_list: Sequence[int],
    tol: float = DEFAULT_TOLERANCE,
    max_workers: int = 1,
) -> CoherenceCurve:
    """Coherence at t = 2 n tau for every pulse count at fixed spacing.

    Gaussian noise goes through the spectral integral, spin baths through
    the exact product formula.

    Args:
        family: Equidistant family fixing tau.
        noise: Noise spectrum or spin bath.
        n_list: Non-empty, strictly ascending pulse counts.
        tol: Absolute exponent tolerance.
        max_workers: Thread count for the per-n evaluations.

    Raises:
        ValueError: Empty or unsorted ``n_list``.
        InvalidSequenceError: Non-equidistant family or invalid counts.
    """
    counts = [int(n) for n in n_list]
    if not counts:
        raise ValueError("n_list must not be empty")
    if any(b <= a for a, b in zip(counts, counts[1:])) or counts[0] < 1:
        raise ValueError(f"n_list must be positive and strictly ascending: {counts}")
    if not family.is_equidistant:
        raise InvalidSequenceError("Coherence curves sweep equidistant families")

    families = [family.with_pulse_count(n) for n in counts]
    chi = _evaluate(families, noise, tol, max_workers)
    t = 2.0 * family.tau * np.asarray(counts, dtype=float)
    return CoherenceCurve(t=t, chi=chi, protocol=_protocol(family, noise), n=counts)


def spin_echo_curve(
    taus: Sequence[float],
    noise: Noise,
    tol: float = DEFAULT_TOLERANCE,
    max_workers: int = 1,
) -> CoherenceCurve:
    """Spin-echo coherence versus t = 2 tau over a sweep of half-spacings."""
    grid = np.asarray(taus, dtype=float)
    if grid.size == 0:
        raise ValueError("taus must not be empty")
    families = [SequenceFamily.spin_echo(tau) for tau in grid]
    chi = _evaluate(families, noise, tol, max_workers)
    protocol = _protocol(families[0], noise)
    protocol["sequence"] = {"kind": "spin_echo", "tau": "swept"}
    return CoherenceCurve(
        t=2.0 * grid, chi=chi, protocol=protocol, n=np.ones_like(grid)
    )
