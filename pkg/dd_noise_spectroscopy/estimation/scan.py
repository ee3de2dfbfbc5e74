from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..coherence import (
    DEFAULT_HARMONICS,
    DEFAULT_TOLERANCE,
    QuadratureError,
    asymptotic_rate,
    coherence_curve,
    harmonic_sum,
)
from ..pulses import SequenceFamily, SequenceKind
from ..spectra import NoiseSpectrum
from ..utils.logging_config import setup_logging
from ..utils.progress import progress
from ..utils.result_io import read_csv, write_csv
from .t2_fit import AMPLITUDE, TAIL, T2Estimate, T2FitRejected, WindowPolicy, fit_t2

logger = setup_logging(__name__)

DEFAULT_PULSE_BUDGET = 1000
SCHEDULE_POINTS = 24
STABILITY_TOLERANCE = 0.01


class FrequencyBoundsError(ValueError):
    """Raised when no valid measurement window exists or a scan leaves it."""


@dataclass(frozen=True)
class FrequencyRange:
    """Measurable angular frequencies pi / 2 tau."""

    omega_lo: float
    omega_hi: float

    def contains(self, omega: float) -> bool:
        return self.omega_lo <= omega <= self.omega_hi

    def to_list(self) -> List[float]:
        return [self.omega_lo, self.omega_hi]


def frequency_bounds(t2_se: float, tau_p: float) -> FrequencyRange:
    """Frequency window (pi / T2SE, pi / tau_p) of a T2L scan.

    Args:
        t2_se: Spin-echo coherence time (s).
        tau_p: Pulse duration (s).

    Raises:
        FrequencyBoundsError: If tau_p >= t2_se or either is not positive.
    """
    if not (t2_se > 0 and tau_p > 0):
        raise FrequencyBoundsError(
            f"Need t2_se > 0 and tau_p > 0, got {t2_se}, {tau_p}"
        )
    if tau_p >= t2_se:
        raise FrequencyBoundsError(
            f"tau_p={tau_p} must be shorter than t2_se={t2_se}: no valid window"
        )
    return FrequencyRange(omega_lo=np.pi / t2_se, omega_hi=np.pi / tau_p)


@dataclass(frozen=True)
class ScanEntry:
    """T2L measured at one half-spacing.

    Attributes:
        tau: Half-spacing (s).
        t2l: Accepted exponential-tail fit.
        n_used: Largest pulse count that entered the fit.
        in_range: Whether pi / 2 tau lies inside the frequency bounds.
        stable: Whether doubling every pulse count changed T2L by <= 1 %.
    """

    tau: float
    t2l: T2Estimate
    n_used: int
    in_range: bool = True
    stable: bool = True

    @property
    def omega(self) -> float:
        return np.pi / (2.0 * self.tau)


@dataclass(frozen=True)
class T2Scan:
    """T2L measurements ordered by strictly increasing tau."""

    entries: Tuple[ScanEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        taus = [e.tau for e in entries]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("Scan taus must be strictly increasing")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def taus(self) -> np.ndarray:
        return np.array([e.tau for e in self.entries])

    @property
    def omegas(self) -> np.ndarray:
        return np.pi / (2.0 * self.taus)

    @property
    def rates(self) -> np.ndarray:
        return np.array([e.t2l.rate for e in self.entries])

    @property
    def rate_stderr(self) -> np.ndarray:
        return np.array([e.t2l.rate_stderr for e in self.entries])

    def flag_out_of_range(self, bounds: FrequencyRange) -> "T2Scan":
        return T2Scan(
            tuple(replace(e, in_range=bounds.contains(e.omega)) for e in self.entries)
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "tau": self.taus,
                "n": [e.n_used for e in self.entries],
                "t2l": [e.t2l.t2 for e in self.entries],
                "t2l_stderr": [e.t2l.stderr_t2 for e in self.entries],
            }
        )

    def to_csv(self, path: Path, header: Optional[Mapping[str, Any]] = None) -> Path:
        return write_csv(self.to_frame(), path, header)

    @classmethod
    def from_csv(cls, path: Path) -> "T2Scan":
        frame, _ = read_csv(path)
        missing = {"tau", "n", "t2l", "t2l_stderr"} - set(frame.columns)
        if missing:
            raise ValueError(f"Scan file {path} lacks columns {sorted(missing)}")
        frame = frame.sort_values("tau")
        return cls(
            tuple(
                ScanEntry(
                    tau=float(row.tau),
                    t2l=T2Estimate(
                        t2=float(row.t2l),
                        fit_window=(float("nan"), float("nan")),
                        residual_rms=float("nan"),
                        stderr_t2=float(row.t2l_stderr),
                    ),
                    n_used=int(row.n),
                )
                for row in frame.itertuples(index=False)
            )
        )


def _step(kind: SequenceKind) -> int:
    return 2 if kind is SequenceKind.APCP else 1


@dataclass(frozen=True)
class PulseSchedule:
    counts: Tuple[int, ...]
    mode: str


def pulse_schedule(
    kind: SequenceKind,
    tau: float,
    planning_rate: float,
    policy: WindowPolicy,
    pulse_budget: int = DEFAULT_PULSE_BUDGET,
    points: int = SCHEDULE_POINTS,
) -> PulseSchedule:
    """Pulse counts that carry the coherence through the fit window.

    The planning rate predicts the readout time 1.5 * chi_hi / rate that
    exhausts the amplitude window. When that needs fewer than ``points``
    pulses (one period already decays past the window) or more than the
    budget, the schedule switches to tail mode over the first ``points``
    counts or the whole budget.
    """
    step = _step(kind)
    if planning_rate <= 0:
        raise T2FitRejected(f"No decay predicted at tau={tau}")

    _, chi_hi = policy.chi_range
    needed = 1.5 * chi_hi / (planning_rate * 2.0 * tau)
    if points <= needed <= pulse_budget:
        top, mode = needed, AMPLITUDE
    elif needed < points:
        top, mode = points * step, TAIL
    else:
        top, mode = pulse_budget, TAIL

    return PulseSchedule(counts=_spread(step, top, points), mode=mode)


def _spread(step: int, top: float, points: int) -> Tuple[int, ...]:
    raw = np.linspace(step, max(top, step), points)
    counts = np.unique(np.maximum(step, np.round(raw / step).astype(int) * step))
    return tuple(int(c) for c in counts)


def _fit_counts(
    family: SequenceFamily,
    noise: NoiseSpectrum,
    counts: Sequence[int],
    policy: WindowPolicy,
    tol: float,
) -> Tuple[T2Estimate, int]:
    curve = coherence_curve(family, noise, counts, tol=tol)
    try:
        estimate = fit_t2(curve, policy)
    except T2FitRejected:
        if policy.mode == TAIL:
            raise
        # The planned window can miss when the pre-asymptotic offset is large
        estimate = fit_t2(curve, replace(policy, mode=TAIL))
    in_window = curve.t <= estimate.fit_window[1] * (1 + 1e-12)
    return estimate, int(curve.n[in_window].max())


def measure_t2l(
    kind: SequenceKind,
    tau: float,
    noise: NoiseSpectrum,
    window_policy: Optional[WindowPolicy] = None,
    pulse_budget: int = DEFAULT_PULSE_BUDGET,
    harmonics: int = DEFAULT_HARMONICS,
    tol: float = DEFAULT_TOLERANCE,
) -> ScanEntry:
    """Simulate and fit T2L at one half-spacing.

    Plans pulse counts from the harmonic-sum rate, fits the simulated
    coherence curve, then repeats with every count doubled; the entry is
    flagged unstable when T2L moves by more than 1 %.

    Raises:
        T2FitRejected: The curve does not support an exponential fit.
        QuadratureError: The coherence integral did not converge.
    """
    policy = window_policy or WindowPolicy()
    kind = SequenceKind(kind)
    if kind is SequenceKind.SPIN_ECHO:
        kind = SequenceKind.CPMG
    family = SequenceFamily(kind, tau=tau, n=2)
    planning = asymptotic_rate(family, noise, harmonics).rate
    schedule = pulse_schedule(kind, tau, planning, policy, pulse_budget)
    policy = replace(policy, mode=schedule.mode)

    estimate, n_used = _fit_counts(family, noise, schedule.counts, policy, tol)
    try:
        # Same density over twice the train length
        longer = _spread(
            _step(kind), 2 * schedule.counts[-1], 2 * len(schedule.counts)
        )
        doubled, _ = _fit_counts(family, noise, longer, policy, tol)
        change = abs(doubled.t2 - estimate.t2) / estimate.t2
        stable = change <= STABILITY_TOLERANCE
    except T2FitRejected as e:
        logger.warning(f"Stability check failed at tau={tau:g}: {e}")
        change, stable = float("nan"), False

    if not stable:
        logger.warning(f"T2L at tau={tau:g} moved by {change:.3g} when n doubled")
    logger.info(
        f"tau={tau:g}: T2L={estimate.t2:.6g} ({estimate.window} window, "
        f"n<={n_used}, planned 1/T2L={planning:.6g})"
    )
    return ScanEntry(tau=float(tau), t2l=estimate, n_used=n_used, stable=stable)


@dataclass
class ScanReport:
    """Accepted scan plus one diagnostics row per requested tau."""

    scan: T2Scan
    diagnostics: pd.DataFrame

    @property
    def failures(self) -> int:
        return int((self.diagnostics["status"] != "ok").sum())

    @property
    def partial(self) -> bool:
        return self.failures > 0


def run_t2_scan(
    taus: Sequence[float],
    noise: NoiseSpectrum,
    kind: SequenceKind = SequenceKind.CPMG,
    window_policy: Optional[WindowPolicy] = None,
    pulse_budget: int = DEFAULT_PULSE_BUDGET,
    harmonics: int = DEFAULT_HARMONICS,
    tol: float = DEFAULT_TOLERANCE,
    bounds: Optional[FrequencyRange] = None,
    force: bool = False,
    max_workers: int = 4,
) -> ScanReport:
    """Measure T2L over a tau grid.

    Per-tau failures are logged and recorded in the diagnostics instead of
    aborting the scan.

    Args:
        taus: Half-spacings, strictly increasing.
        noise: Noise spectrum.
        kind: CPMG or APCP pulse trains.
        window_policy: Fit window policy.
        pulse_budget: Largest pulse count of the primary schedule.
        harmonics: Harmonic cutoff of the planning rate.
        tol: Coherence exponent tolerance.
        bounds: Frequency window; entries outside are flagged.
        force: Scan taus outside ``bounds`` instead of refusing.
        max_workers: Concurrent taus.

    Returns:
        ScanReport: Accepted entries and per-tau diagnostics.

    Raises:
        FrequencyBoundsError: Taus outside ``bounds`` without ``force``.
        ValueError: Empty or unsorted tau grid.
    """
    grid = [float(t) for t in taus]
    if not grid:
        raise ValueError("Tau grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("Tau grid must be strictly increasing")
    if bounds is not None and not force:
        outside = [t for t in grid if not bounds.contains(np.pi / (2 * t))]
        if outside:
            raise FrequencyBoundsError(
                f"taus {outside} lie outside pi/2tau in {bounds.to_list()}; "
                "use force to scan anyway"
            )

    results: Dict[int, ScanEntry] = {}
    rows: Dict[int, Dict[str, Any]] = {}
    with progress.main_bar(total=len(grid), desc="T2L scan") as bar:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = {
                executor.submit(
                    measure_t2l,
                    kind,
                    tau,
                    noise,
                    window_policy,
                    pulse_budget,
                    harmonics,
                    tol,
                ): index
                for index, tau in enumerate(grid)
            }
            for future in as_completed(futures):
                index = futures[future]
                tau = grid[index]
                try:
                    entry = future.result()
                    if bounds is not None:
                        entry = replace(entry, in_range=bounds.contains(entry.omega))
                    results[index] = entry
                    rows[index] = _diagnostic_row(tau, entry, "ok", "")
                except (T2FitRejected, QuadratureError) as e:
                    logger.error(f"T2L fit failed at tau={tau:g}: {e}", exc_info=True)
                    rows[index] = _diagnostic_row(tau, None, "rejected", str(e))
                bar.update(1)

    scan = T2Scan(tuple(results[i] for i in sorted(results)))
    diagnostics = pd.DataFrame([rows[i] for i in range(len(grid))])
    return ScanReport(scan=scan, diagnostics=diagnostics)


def _diagnostic_row(
    tau: float, entry: Optional[ScanEntry], status: str, reason: str
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "tau": tau,
        "omega": np.pi / (2 * tau),
        "status": status,
        "reason": reason,
    }
    if entry is None:
        row.update(
            window="",
            n=0,
            t2l=np.nan,
            residual_rms=np.nan,
            fit_t_lo=np.nan,
            fit_t_hi=np.nan,
            stable=False,
            in_range=False,
        )
    else:
        row.update(
            window=entry.t2l.window,
            n=entry.n_used,
            t2l=entry.t2l.t2,
            residual_rms=entry.t2l.residual_rms,
            fit_t_lo=entry.t2l.fit_window[0],
            fit_t_hi=entry.t2l.fit_window[1],
            stable=entry.stable,
            in_range=entry.in_range,
        )
    return row


def synthetic_scan(
    spectrum: NoiseSpectrum,
    taus: Sequence[float],
    L: int = DEFAULT_HARMONICS,
    noise_level: float = 0.0,
    seed: int = 0,
) -> T2Scan:
    """Scan generated from the harmonic-sum forward model.

    Rates receive multiplicative Gaussian noise of relative size
    ``noise_level``; the reported standard error matches that level.
    """
    grid = np.asarray(taus, dtype=float)
    rates = np.asarray(harmonic_sum(spectrum, grid, L), dtype=float)
    if noise_level > 0:
        rng = np.random.default_rng(seed)
        rates = rates * (1.0 + noise_level * rng.standard_normal(rates.shape))
    entries = []
    for tau, rate in zip(grid, rates):
        t2 = 1.0 / rate
        entries.append(
            ScanEntry(
                tau=float(tau),
                t2l=T2Estimate(
                    t2=t2,
                    fit_window=(float("nan"), float("nan")),
                    residual_rms=0.0,
                    stderr_t2=noise_level * t2,
                    window="synthetic",
                ),
                n_used=0,
            )
        )
    return T2Scan(tuple(entries))
