"""
Numerical classification of the asymptotic behavior of the fixed-parameter planar system.

Trajectories from a grid of initial conditions are integrated in one compiled batch; after the
transient each one is classified as a point (diameter < 1e-5) or a cycle (amplitude > 1e-3 with
a detectable period). Terminal behaviors are then merged into a single report.
"""

import dataclasses
import enum
import logging

import numpy as np

from src.analysis.fixed_points import stable_fixed_points
from src.analysis.timeseries import estimate_period
from src.config.app import DEFAULT_DT
from src.dynamics.models import ActivityPoint, SystemParams
from src.evolution.integrator import planar_trajectories

logger = logging.getLogger(__name__)

POINT_DIAMETER = 1e-5
CYCLE_AMPLITUDE = 1e-3
T_TRANSIENT = 500.0
T_MEASURE = 500.0
SAMPLE_EVERY = 0.05
GRID_SIZE = 5
DENSE_GRID_SIZE = 15
SEED_PERTURBATION = 1e-4

POINT_MERGE_DISTANCE = 1e-4
CYCLE_MERGE_DISTANCE = 1e-2
CYCLE_MERGE_AMPLITUDE = 0.05


class AttractorKind(enum.StrEnum):
    SINGLE_POINT = "SinglePoint"
    TWO_POINTS = "TwoPoints"
    THREE_COEXISTING = "ThreeCoexisting"
    LIMIT_CYCLE = "LimitCycle"
    CYCLE_AND_POINT = "CycleAndPoint"
    UNCLASSIFIED = "Unclassified"


@dataclasses.dataclass(frozen=True)
class CycleSummary:
    period: float
    amplitude: float
    center: ActivityPoint
    samples: np.ndarray

    def matches(self, other: "CycleSummary") -> bool:
        largest = max(self.amplitude, other.amplitude)
        amplitude_ratio = abs(self.amplitude - other.amplitude) / largest
        return (
            self.center.distance(other.center) < CYCLE_MERGE_DISTANCE
            and amplitude_ratio < CYCLE_MERGE_AMPLITUDE
        )


@dataclasses.dataclass(frozen=True)
class AttractorReport:
    kind: AttractorKind
    points: tuple[ActivityPoint, ...] = ()
    cycles: tuple[CycleSummary, ...] = ()
    unclassified: int = 0
    trajectories: int = 0

    @property
    def period(self) -> float | None:
        return self.cycles[0].period if self.cycles else None

    @property
    def amplitude(self) -> float | None:
        return self.cycles[0].amplitude if self.cycles else None


def default_init_grid(params: SystemParams, size: int = GRID_SIZE) -> np.ndarray:
    """
    size x size grid over the activity box plus four points near the corners.

    The grid is shifted by a small asymmetric offset so that no start sits exactly on the
    symmetric fixed point of the reduced system.
    """
    low, high = params.box
    span = high - low
    ticks = low + span * (np.arange(size) + 0.5) / size
    s_grid, sigma_grid = np.meshgrid(ticks + 0.0123 * span, ticks - 0.0071 * span)
    grid = np.column_stack([s_grid.ravel(), sigma_grid.ravel()])
    inset = 0.02 * span
    corners = np.array(
        [
            [low + inset, low + inset],
            [low + inset, high - inset],
            [high - inset, low + inset],
            [high - inset, high - inset],
        ]
    )
    return np.clip(np.vstack([grid, corners]), low, high)


def dense_init_grid(params: SystemParams) -> np.ndarray:
    """Fine grid plus seeds right next to every linearly stable fixed point (narrow basins)"""
    seeds = [
        np.asarray(point.location) + SEED_PERTURBATION * np.array([1.0, -0.5])
        for point in stable_fixed_points(params)
    ]
    grid = default_init_grid(params, DENSE_GRID_SIZE)
    return np.vstack([grid, *seeds]) if seeds else grid


@dataclasses.dataclass(frozen=True)
class TerminalBehavior:
    point: ActivityPoint | None = None
    cycle: CycleSummary | None = None


def classify_terminal(samples: np.ndarray, sample_every: float) -> TerminalBehavior:
    """Point, cycle or neither (both fields None) for one post-transient trajectory"""
    spread = np.ptp(samples, axis=0)
    if spread.max() < POINT_DIAMETER:
        return TerminalBehavior(point=ActivityPoint(*map(float, samples[-1])))

    amplitude = float(spread.max())
    if amplitude <= CYCLE_AMPLITUDE:
        return TerminalBehavior()

    component = int(np.argmax(spread))
    times = np.arange(len(samples)) * sample_every
    estimate = estimate_period(times, samples[:, component])
    if estimate.period is None or estimate.cycles < 2:
        return TerminalBehavior()

    center = ActivityPoint(*map(float, samples.mean(axis=0)))
    return TerminalBehavior(
        cycle=CycleSummary(
            period=estimate.period, amplitude=amplitude, center=center, samples=samples
        )
    )


def _kind_for(points: int, cycles: int) -> AttractorKind:
    return {
        (1, 0): AttractorKind.SINGLE_POINT,
        (2, 0): AttractorKind.TWO_POINTS,
        (0, 1): AttractorKind.LIMIT_CYCLE,
        (2, 1): AttractorKind.THREE_COEXISTING,
        (1, 1): AttractorKind.CYCLE_AND_POINT,
    }.get((points, cycles), AttractorKind.UNCLASSIFIED)


def merge_behaviors(behaviors: list[TerminalBehavior]) -> AttractorReport:
    points: list[ActivityPoint] = []
    cycles: list[CycleSummary] = []
    unclassified = 0
    for behavior in behaviors:
        if behavior.point is not None:
            if not any(behavior.point.distance(p) < POINT_MERGE_DISTANCE for p in points):
                points.append(behavior.point)
        elif behavior.cycle is not None:
            if not any(behavior.cycle.matches(c) for c in cycles):
                cycles.append(behavior.cycle)
        else:
            unclassified += 1

    kind = _kind_for(len(points), len(cycles))
    return AttractorReport(
        kind=kind,
        points=tuple(sorted(points)),
        cycles=tuple(cycles),
        unclassified=unclassified,
        trajectories=len(behaviors),
    )


def detect_attractors(
    params: SystemParams,
    init_grid: np.ndarray | None = None,
    t_transient: float = T_TRANSIENT,
    t_measure: float = T_MEASURE,
    dense: bool = False,
    dt: float = DEFAULT_DT,
    sample_every: float = SAMPLE_EVERY,
) -> AttractorReport:
    """
    Integrates from every initial condition and merges the terminal behaviors.

    Unclassified trajectories are counted but do not hide the attractors found by the others;
    the report is Unclassified only when no trajectory settles or the combination of attractors
    has no name.
    """
    if init_grid is None:
        init_grid = dense_init_grid(params) if dense else default_init_grid(params)

    samples = planar_trajectories(params, init_grid, dt, t_transient, t_measure, sample_every)
    report = merge_behaviors([classify_terminal(traj, sample_every) for traj in samples])
    if report.unclassified:
        logger.debug(
            "%(count)s of %(total)s trajectories unclassified at %(params)s",
            {"count": report.unclassified, "total": report.trajectories, "params": params},
        )
    return report
