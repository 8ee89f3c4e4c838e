"""Period, phase and lag diagnostics of sampled signals"""

import dataclasses
import enum
import logging

import numpy as np

from src.exceptions import DomainError

logger = logging.getLogger(__name__)

HYSTERESIS_FRACTION = 0.1
PERIOD_CV_TOLERANCE = 0.01
MIN_CYCLES = 3


@dataclasses.dataclass(frozen=True)
class PeriodEstimate:
    crossings: np.ndarray
    period: float | None
    variation: float | None
    periodic: bool

    @property
    def cycles(self) -> int:
        return max(0, len(self.crossings) - 1)


def upward_crossings(
    times: np.ndarray, values: np.ndarray, level: float | None = None
) -> np.ndarray:
    """
    Times where the signal crosses `level` (default: its mean) upward, linearly interpolated.

    A crossing counts only after the signal dipped below level - 10% of its range, so sampling
    noise near the level does not produce spurious crossings.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return np.empty(0)

    spread = float(np.ptp(values))
    if spread == 0.0:
        return np.empty(0)

    level = float(np.mean(values)) if level is None else level
    arm_below = level - HYSTERESIS_FRACTION * spread

    crossings = []
    armed = False
    for k in range(1, len(values)):
        if values[k - 1] < arm_below:
            armed = True
        if armed and values[k - 1] < level <= values[k]:
            fraction = (level - values[k - 1]) / (values[k] - values[k - 1])
            crossings.append(times[k - 1] + fraction * (times[k] - times[k - 1]))
            armed = False

    return np.asarray(crossings)


def estimate_period(
    times: np.ndarray,
    values: np.ndarray,
    tolerance: float = PERIOD_CV_TOLERANCE,
    min_cycles: int = MIN_CYCLES,
) -> PeriodEstimate:
    """Mean interval between upward mean crossings and its coefficient of variation"""
    crossings = upward_crossings(times, values)
    if len(crossings) < 2:
        return PeriodEstimate(crossings=crossings, period=None, variation=None, periodic=False)

    intervals = np.diff(crossings)
    period = float(np.mean(intervals))
    variation = float(np.std(intervals) / period)
    periodic = len(intervals) >= min_cycles and variation < tolerance
    return PeriodEstimate(
        crossings=crossings, period=period, variation=variation, periodic=periodic
    )


class Phase(enum.StrEnum):
    HIGH = "high"
    LOW = "low"
    OSCILLATORY = "oscillatory"


@dataclasses.dataclass(frozen=True)
class PhaseEpisodes:
    starts: np.ndarray
    phases: tuple[Phase, ...]

    @property
    def transitions(self) -> np.ndarray:
        """Start times of the windows whose phase differs from the previous window"""
        changed = [k for k in range(1, len(self.phases)) if self.phases[k] != self.phases[k - 1]]
        return self.starts[changed]

    @property
    def transition_count(self) -> int:
        return len(self.transitions)

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(self.transitions)

    @property
    def irregular(self) -> bool:
        """Inter-transition intervals are not all equal"""
        intervals = self.intervals
        return len(intervals) > 1 and float(np.ptp(intervals)) > 0.0


def classify_phases(
    times: np.ndarray,
    values: np.ndarray,
    window: float,
    midpoint: float = 0.5,
    oscillation_threshold: float = 0.05,
) -> PhaseEpisodes:
    """
    Splits the signal into consecutive windows of `window` time units and labels each one:
    oscillatory when its standard deviation exceeds the threshold, otherwise high or low
    depending on the window mean relative to `midpoint`.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if not window > 0:
        raise DomainError(f"Window must be positive, got {window}")
    if len(times) == 0:
        return PhaseEpisodes(starts=np.empty(0), phases=())

    edges = np.arange(times[0], times[-1] + window, window)
    index = np.searchsorted(times, edges)
    starts, phases = [], []
    for begin, end, start in zip(index[:-1], index[1:], edges[:-1]):
        chunk = values[begin:end]
        if len(chunk) < 2:
            continue
        if np.std(chunk) > oscillation_threshold:
            phase = Phase.OSCILLATORY
        else:
            phase = Phase.HIGH if np.mean(chunk) > midpoint else Phase.LOW
        starts.append(start)
        phases.append(phase)

    return PhaseEpisodes(starts=np.asarray(starts), phases=tuple(phases))


def count_phase_transitions(
    times: np.ndarray, values: np.ndarray, window: float, midpoint: float = 0.5
) -> int:
    return classify_phases(times, values, window, midpoint).transition_count


def peak_lag(
    reference: np.ndarray, follower: np.ndarray, sample_dt: float, max_lag: float
) -> float:
    """
    Lag (time units) maximizing the correlation of follower(t + lag) with reference(t),
    searched over [-max_lag, max_lag]; positive means the follower lags behind.
    """
    reference = np.asarray(reference, dtype=float) - np.mean(reference)
    follower = np.asarray(follower, dtype=float) - np.mean(follower)
    if len(reference) != len(follower):
        raise DomainError("Signals must have the same length")

    max_shift = min(int(round(max_lag / sample_dt)), len(reference) - 2)
    shifts = np.arange(-max_shift, max_shift + 1)
    scores = np.empty(len(shifts))
    for k, shift in enumerate(shifts):
        if shift >= 0:
            a, b = reference[: len(reference) - shift], follower[shift:]
        else:
            a, b = reference[-shift:], follower[: len(follower) + shift]
        denominator = np.sqrt(np.dot(a, a) * np.dot(b, b))
        scores[k] = np.dot(a, b) / denominator if denominator > 0 else 0.0

    return float(shifts[int(np.argmax(scores))] * sample_dt)
