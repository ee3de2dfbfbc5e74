from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np


class InvalidSequenceError(ValueError):
    """Raised when pulse timings or family parameters are not a valid sequence."""


@dataclass(frozen=True)
class PulseSequence:
    """Ideal pi-pulse instants on [0, t] followed by a readout at t.

    Attributes:
        times: Strictly increasing pulse instants t_1 < ... < t_n.
        readout_time: Readout time t, later than the last pulse.
        half_spacing: Set only for equidistant sequences built by
            ``make_sequence`` (pulses at tau, 3 tau, ..., readout at 2 n tau);
            enables the closed-form filter evaluation.
    """

    times: Tuple[float, ...]
    readout_time: float
    half_spacing: Optional[float] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        times = tuple(float(x) for x in np.atleast_1d(np.asarray(self.times, float)))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "readout_time", float(self.readout_time))

        if not np.isfinite(self.readout_time) or self.readout_time <= 0:
            raise InvalidSequenceError(
                f"Readout time must be positive and finite, got {self.readout_time}"
            )
        if not times:
            return
        arr = np.asarray(times)
        if not np.all(np.isfinite(arr)):
            raise InvalidSequenceError("Pulse times must be finite")
        if arr[0] <= 0:
            raise InvalidSequenceError(f"First pulse must be after 0, got {arr[0]}")
        if np.any(np.diff(arr) <= 0):
            raise InvalidSequenceError(f"Pulse times must strictly increase: {times}")
        if arr[-1] >= self.readout_time:
            raise InvalidSequenceError(
                f"Last pulse {arr[-1]} must precede readout {self.readout_time}"
            )

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def boundaries(self) -> np.ndarray:
        """Segment edges 0, t_1, ..., t_n, t."""
        return np.concatenate(([0.0], self.times, [self.readout_time]))

    @property
    def is_equidistant(self) -> bool:
        return self.half_spacing is not None

    @property
    def min_segment(self) -> float:
        return float(np.min(np.diff(self.boundaries)))


class SequenceKind(str, Enum):
    SPIN_ECHO = "spin_echo"
    CPMG = "cpmg"
    APCP = "apcp"
    CUSTOM = "custom"
    UDD = "udd"


EQUIDISTANT_KINDS = (SequenceKind.SPIN_ECHO, SequenceKind.CPMG, SequenceKind.APCP)


@dataclass(frozen=True)
class SequenceFamily:
    """Parametrized description of a pulse sequence.

    Equidistant kinds place pulses at tau, 3 tau, ... with readout 2 n tau.
    CPMG and APCP timings coincide for ideal pulses; APCP keeps its block
    structure requirement of an even pulse count. Build instances with the
    classmethods rather than the raw constructor.
    """

    kind: SequenceKind
    tau: Optional[float] = None
    n: Optional[int] = None
    times: Optional[Tuple[float, ...]] = None
    readout_time: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SequenceKind(self.kind))
        if self.kind in EQUIDISTANT_KINDS:
            if self.tau is None or not np.isfinite(self.tau) or self.tau <= 0:
                raise InvalidSequenceError(
                    f"{self.kind.value} requires tau > 0, got {self.tau}"
                )
            if self.kind is SequenceKind.SPIN_ECHO:
                object.__setattr__(self, "n", 1)
            elif self.n is None or int(self.n) < 1:
                raise InvalidSequenceError(
                    f"{self.kind.value} requires n >= 1, got {self.n}"
                )
            object.__setattr__(self, "n", int(self.n))
            if self.kind is SequenceKind.APCP and self.n % 2:
                raise InvalidSequenceError(f"APCP requires an even n, got {self.n}")
        elif self.kind is SequenceKind.UDD:
            if self.n is None or int(self.n) < 1:
                raise InvalidSequenceError(f"udd requires n >= 1, got {self.n}")
            if self.readout_time is None or self.readout_time <= 0:
                raise InvalidSequenceError("udd requires a positive readout_time")
            object.__setattr__(self, "n", int(self.n))
        else:
            if self.times is None or self.readout_time is None:
                raise InvalidSequenceError("custom requires times and readout_time")
            object.__setattr__(self, "times", tuple(float(x) for x in self.times))

    @classmethod
    def spin_echo(cls, tau: float) -> "SequenceFamily":
        return cls(SequenceKind.SPIN_ECHO, tau=tau)

    @classmethod
    def cpmg(cls, tau: float, n: int) -> "SequenceFamily":
        return cls(SequenceKind.CPMG, tau=tau, n=n)

    @classmethod
    def apcp(cls, tau: float, n: int) -> "SequenceFamily":
        return cls(SequenceKind.APCP, tau=tau, n=n)

    @classmethod
    def custom(cls, times: Sequence[float], readout_time: float) -> "SequenceFamily":
        return cls(SequenceKind.CUSTOM, times=tuple(times), readout_time=readout_time)

    @classmethod
    def udd(cls, readout_time: float, n: int) -> "SequenceFamily":
        return cls(SequenceKind.UDD, n=n, readout_time=readout_time)

    @property
    def is_equidistant(self) -> bool:
        return self.kind in EQUIDISTANT_KINDS

    def with_pulse_count(self, n: int) -> "SequenceFamily":
        """Same family and spacing with a different pulse count.

        A spin echo extended beyond one pulse becomes a CPMG train.

        Raises:
            InvalidSequenceError: For custom timings.
        """
        if self.kind is SequenceKind.SPIN_ECHO:
            if n == 1:
                return self
            return SequenceFamily.cpmg(self.tau, n)
        if self.kind is SequenceKind.CUSTOM:
            raise InvalidSequenceError("custom sequences have a fixed pulse count")
        return replace(self, n=n)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind in EQUIDISTANT_KINDS:
            payload["tau"] = self.tau
            if self.kind is not SequenceKind.SPIN_ECHO:
                payload["n"] = self.n
        elif self.kind is SequenceKind.UDD:
            payload.update(n=self.n, readout_time=self.readout_time)
        else:
            payload.update(times=list(self.times), readout_time=self.readout_time)
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SequenceFamily":
        try:
            kind = SequenceKind(payload["kind"])
        except (KeyError, ValueError) as e:
            raise InvalidSequenceError(f"Unknown sequence kind in {payload}") from e
        times = payload.get("times")
        return cls(
            kind,
            tau=payload.get("tau"),
            n=payload.get("n"),
            times=tuple(times) if times is not None else None,
            readout_time=payload.get("readout_time"),
        )


def make_sequence(family: SequenceFamily) -> PulseSequence:
    """Instantiate the pulse instants of a sequence family.

    Args:
        family: Family description.

    Returns:
        PulseSequence: Valid sequence; equidistant families have t = 2 n tau.

    Raises:
        InvalidSequenceError: If the timings are not strictly increasing inside (0, t).
    """
    if family.is_equidistant:
        k = np.arange(1, family.n + 1)
        return PulseSequence(
            times=tuple((2 * k - 1) * family.tau),
            readout_time=2 * family.n * family.tau,
            half_spacing=family.tau,
        )
    if family.kind is SequenceKind.UDD:
        k = np.arange(1, family.n + 1)
        t = family.readout_time
        return PulseSequence(
            times=tuple(t * np.sin(k * np.pi / (2 * family.n + 2)) ** 2),
            readout_time=t,
        )
    return PulseSequence(times=family.times, readout_time=family.readout_time)


def sequence_from_dict(payload: Dict[str, Any]) -> PulseSequence:
    """Pulse instants of the family described by a config ``sequence`` document."""
    return make_sequence(SequenceFamily.from_dict(payload))
