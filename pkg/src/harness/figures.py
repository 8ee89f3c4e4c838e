"""
Built-in figure reproductions. Every figure is a `BaseFigure` subclass keyed by its FigureId:
it declares the scenarios to run, may render extra plots from their results, and knows the
acceptance checks that `--check` evaluates.
"""

import abc
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, ClassVar, Sequence, Type, TypeVar

import numpy as np
import yaml

from src.analysis.bifurcations import NullclineGap, saddlenode_wee
from src.analysis.lyapunov import largest_lyapunov
from src.analysis.region_map import BifurcationMap, RegionLabel
from src.analysis.timeseries import classify_phases, estimate_period, upward_crossings
from src.config.app import WORKERS, FigureId, ScenarioKind, SystemVariant
from src.dynamics.core import symmetric_thresholds
from src.dynamics.models import SynapticWeights
from src.evolution.regulation import Trace, integrate
from src.exceptions import CheckFailedError, NonFiniteError, NoTangencyError
from src.harness.plotting import Curve, ProfilePlot, TimeSeriesPlot, emit_plot
from src.harness.runner import RunResult, phase_portrait, run_scenario
from src.harness.scenario import (
    AxisSection,
    GlauberSection,
    InitialSection,
    IntegratorSection,
    ProfileSection,
    RegulationSection,
    ScanSection,
    ScenarioConfig,
    ThresholdsSection,
    WeightsSection,
    parse_scenario,
)
from src.storage.artifacts import ArtifactStore

logger = logging.getLogger(__name__)

TAIL_FRACTION = 0.25
PHASE_WINDOW = 20.0
CORNER_RANGE = (0.3, 0.5 - 1e-6)

FIG1_WEIGHTS = WeightsSection(w_ee=12.0, w_ei=10.0, w_ie=8.0, w_ii=2.0)
PHASE_STARTS = ((0.3, 0.2), (-0.3, -0.2), (0.05, -0.02), (0.45, 0.4), (-0.45, -0.4))
REGULATION_WEIGHTS = WeightsSection(w_ee=12.0, w_ei=10.0, w_ie=12.0, w_ii=6.0)
REDUCED_START = ((0.1, 0.05),)
THRESHOLD_WEIGHTS = WeightsSection(w_ee=12.0, w_ei=10.0, w_ie=10.0, w_ii=1.0)
FULL_START = ((0.6, 0.4),)

STANDARD = RegulationSection(
    rho=0.05,
    eps_ee=0.01,
    theta_ee=0.01,
    eps_ie=-0.005,
    theta_ie=0.01,
    eps_he=0.005,
    theta_he=0.5,
    eps_hi=0.002,
    theta_hi=0.5,
    regulate=("w_ee", "w_ie", "h_e", "h_i"),
)
SQUARE_WAVE_FRACTION = 0.75

# (w_ee, w_ie, (s, sigma)) starts screened in order for the irregular attractor
ChaoticStart = tuple[float, float, tuple[float, float]]
CHAOTIC_CANDIDATES: tuple[ChaoticStart, ...] = tuple(
    (w_ee, w_ie, activity)
    for w_ee, w_ie in ((13.0, 11.0), (14.0, 14.0), (16.0, 12.0), (12.0, 16.0))
    for activity in ((0.62, 0.41), (0.6, 0.4), (0.2, 0.1))
)
CHAOTIC_SCREEN_T_END = 4e4

Candidate = TypeVar("Candidate")


@dataclasses.dataclass
class FigureResult:
    figure_id: FigureId
    store: ArtifactStore
    runs: dict[str, RunResult]
    failures: list[str] = dataclasses.field(default_factory=list)


def tail(trace: Trace, fraction: float = TAIL_FRACTION) -> Trace:
    start, end = float(trace.times[0]), float(trace.times[-1])
    return trace.tail(end - fraction * (end - start))


def standard_scenario(
    name: str, w_ee: float, w_ie: float, start: tuple[float, float], **changes: float
) -> ScenarioConfig:
    """Four-parameter regulation of the full system from (w_ee, w_ie) with symmetric thresholds"""
    weights = dataclasses.replace(REGULATION_WEIGHTS, w_ee=w_ee, w_ie=w_ie)
    thresholds = symmetric_thresholds(SynapticWeights(**dataclasses.asdict(weights)))
    return ScenarioConfig(
        kind=ScenarioKind.REGULATE,
        name=name,
        variant=SystemVariant.FULL,
        weights=weights,
        thresholds=ThresholdsSection(h_e=thresholds.h_e, h_i=thresholds.h_i),
        regulation=dataclasses.replace(STANDARD, **changes),
        integrator=IntegratorSection(t_end=2e5, sample_every=1.0),
        initial=InitialSection(points=(start,)),
    )


def plateau_fraction(values: np.ndarray) -> float:
    """Share of samples within a fifth of the (5th, 95th) percentile range of either end"""
    low, high = np.percentile(values, [5, 95])
    band = 0.2 * (high - low)
    return float(np.mean((values <= low + band) | (values >= high - band)))


def periodic_failures(trace: Trace, label: str) -> list[str]:
    failures = []
    last = tail(trace)
    estimate = estimate_period(last.times, last.s)
    if not estimate.periodic:
        failures.append(f"{label}: s(t) is not simple periodic (variation {estimate.variation})")
    if (plateaus := plateau_fraction(last.s)) < SQUARE_WAVE_FRACTION:
        failures.append(f"{label}: s(t) sits on its plateaus only {plateaus:.0%} of the time")
    for name in ("w_ee", "w_ie"):
        if (amplitude := float(np.ptp(last.column(name)))) >= 0.5:
            failures.append(f"{label}: {name} oscillation amplitude {amplitude:.3g} >= 0.5")
    return failures


def irregular_failures(trace: Trace) -> list[str]:
    last = tail(trace, fraction=0.5)
    failures = []
    if estimate_period(last.times, last.s).periodic:
        failures.append("s(t) is periodic")
    episodes = classify_phases(last.times, last.s, PHASE_WINDOW)
    if episodes.transition_count <= 10:
        failures.append(f"only {episodes.transition_count} phase transitions")
    if not episodes.irregular:
        failures.append("phase transitions are evenly spaced")
    return failures


def periodic_between(row: Sequence[RegionLabel]) -> bool:
    """
    True when no O or T cell lies inside the span of P cells, every O cell is left of it and
    every T cell right of it. Other labels may interleave; a row without P passes.
    """
    periodic = [i for i, label in enumerate(row) if label is RegionLabel.P]
    if not periodic:
        return True
    last_o = max((i for i, label in enumerate(row) if label is RegionLabel.O), default=-1)
    first_t = min((i for i, label in enumerate(row) if label is RegionLabel.T), default=len(row))
    return last_o < periodic[0] and periodic[-1] < first_t


def boundary_points(
    region_map: BifurcationMap, first: RegionLabel, second: RegionLabel
) -> list[tuple[float, float]]:
    """Midpoints between horizontally or vertically adjacent cells labelled first and second"""
    xs, ys = region_map.x_axis.values(), region_map.y_axis.values()
    pair = {first, second}
    points = []
    for j, row in enumerate(region_map.labels):
        for i, label in enumerate(row):
            if i + 1 < len(row) and {label, row[i + 1]} == pair:
                points.append((float(0.5 * (xs[i] + xs[i + 1])), float(ys[j])))
            if j + 1 < len(region_map.labels) and {label, region_map.labels[j + 1][i]} == pair:
                points.append((float(xs[i]), float(0.5 * (ys[j] + ys[j + 1]))))
    return points


def first_passing(
    candidates: Sequence[Candidate],
    screen: Callable[[Candidate], list[str]],
    workers: int = WORKERS,
) -> Candidate:
    """
    First candidate whose screen returns no failures, in candidate order. Screens run in a
    process pool when workers > 1. Falls back to the first candidate when none passes.
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(screen, candidates))
    else:
        outcomes = [screen(candidate) for candidate in candidates]

    for candidate, failures in zip(candidates, outcomes):
        logger.info("Screened %s: %s", candidate, "; ".join(failures) or "passed")
        if not failures:
            return candidate
    logger.warning("No candidate passed the screen, keeping %s", candidates[0])
    return candidates[0]


def _screen_chaotic(candidate: ChaoticStart) -> list[str]:
    w_ee, w_ie, activity = candidate
    scenario = standard_scenario("screen", w_ee, w_ie, activity, **ChaoticFigure.changes)
    try:
        trace = integrate(
            scenario.regulation_config(),
            scenario.initial_states()[0],
            dt=scenario.integrator.dt,
            t_end=CHAOTIC_SCREEN_T_END,
            sample_every=scenario.integrator.sample_every,
        )
    except NonFiniteError as exc:
        return [str(exc)]
    return irregular_failures(trace)


def saddlenode_arrival(trace: Trace, w_ei: float, w_ii: float, samples: int = 400) -> int | None:
    """Index of the first of `samples` evenly spaced states with w_ee within 0.2 of the line"""
    for k in np.linspace(0, len(trace) - 1, samples).astype(int):
        try:
            target = saddlenode_wee(w_ei, w_ii, float(trace.w_ie[k]), 1.0)
        except NoTangencyError:
            continue
        if abs(float(trace.w_ee[k]) - target) < 0.2:
            return int(k)
    return None


def two_stage_failures(trace: Trace, w_ei: float = 10.0, w_ii: float = 6.0) -> list[str]:
    """w_ee must reach the saddle-node line in the first half while w_ie still drifts after"""
    arrival = saddlenode_arrival(trace, w_ei, w_ii)
    if arrival is None:
        return ["w_ee never came within 0.2 of the saddle-node line"]
    t_arrival, t_end = float(trace.times[arrival]), float(trace.times[-1])
    if t_arrival > 0.5 * t_end:
        return [f"w_ee reached the saddle-node line only at t={t_arrival:.4g}"]
    if (drift := abs(float(trace.w_ie[-1] - trace.w_ie[arrival]))) < 0.2:
        return [f"w_ie moved only {drift:.3g} after w_ee reached the saddle-node line"]
    return []


class BaseFigure(abc.ABC):
    figure_id: ClassVar[FigureId] = NotImplemented
    title: ClassVar[str] = ""

    @abc.abstractmethod
    def scenarios(self) -> list[ScenarioConfig]:
        pass

    def prepare(self, workers: int = WORKERS) -> dict[str, Any]:
        """Searches that pick scenario inputs; returns what they chose, to be recorded"""
        return {}

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        """Plots beyond the per-scenario ones"""

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        return []

    @classmethod
    def get_figures(cls) -> dict[FigureId, Type["BaseFigure"]]:
        figures = {}
        for subclass in cls.__subclasses__():
            if subclass.figure_id is not NotImplemented:
                figures[subclass.figure_id] = subclass
            figures.update(subclass.get_figures())
        return figures


class GlauberFigure(BaseFigure):
    figure_id = FigureId.FIG_1
    title = "Glauber network, N=70"

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.SIMULATE,
                name="glauber",
                variant=SystemVariant.FULL,
                weights=FIG1_WEIGHTS,
                thresholds=ThresholdsSection(h_e=1.0, h_i=3.0),
                integrator=IntegratorSection(t_end=60.0),
                glauber=GlauberSection(n=70),
                seed=1,
            )
        ]

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        trace = runs["glauber"].outputs["population_trace"]
        failures = []
        if (variance := float(np.var(trace.mean_e))) <= 0.05:
            failures.append(f"variance of mean_e {variance:.3g} <= 0.05")
        # every upward crossing is paired with a downward one
        crossings = 2 * len(upward_crossings(trace.times, trace.mean_e, 0.5))
        if crossings < 10:
            failures.append(f"mean_e crossed 0.5 only {crossings} times")
        return failures


class PhaseDiagramFigure(BaseFigure):
    """Trajectories and nullclines of the reduced system at one w_ee"""

    w_ee: ClassVar[float] = NotImplemented

    def excitatory_weight(self) -> float:
        return self.w_ee

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.MEANFIELD,
                name="phase",
                weights=dataclasses.replace(FIG1_WEIGHTS, w_ee=self.excitatory_weight()),
                integrator=IntegratorSection(t_end=60.0, sample_every=0.05),
                initial=InitialSection(points=PHASE_STARTS),
            )
        ]


class BeforeSaddleNodeFigure(PhaseDiagramFigure):
    figure_id = FigureId.FIG_2A
    title = "Limit cycle around the origin (w_ee = 12)"
    w_ee = 12.0

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        points = runs["phase"].outputs["fixed_points"]
        return [] if len(points) == 1 else [f"expected 1 fixed point, found {len(points)}"]


class SaddleNodeFigure(PhaseDiagramFigure):
    figure_id = FigureId.FIG_2B
    title = "Nullclines tangent at the saddle-node"

    def excitatory_weight(self) -> float:
        w = FIG1_WEIGHTS
        return saddlenode_wee(w.w_ei, w.w_ii, w.w_ie, 1.0)

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        w = FIG1_WEIGHTS
        gap = NullclineGap(w_ei=w.w_ei, w_ii=w.w_ii, w_ie=w.w_ie, temperature=1.0)
        grid = np.linspace(*CORNER_RANGE, 20001)
        w_ee = self.excitatory_weight()
        failures = []
        for sign in (1.0, -1.0):
            distance = float(np.min(np.abs(gap.value(sign * grid, w_ee))))
            if distance >= 1e-3:
                failures.append(f"nullclines {distance:.3g} apart near s={sign * 0.45:+.2f}")
        return failures


class BistableFigure(PhaseDiagramFigure):
    figure_id = FigureId.FIG_2C
    title = "Two stable equilibria (w_ee = 15)"
    w_ee = 15.0

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        points = runs["phase"].outputs["fixed_points"]
        stable = sum(point.is_stable for point in points)
        if len(points) != 5 or stable != 2:
            return [f"expected 5 fixed points (2 stable), found {len(points)} ({stable} stable)"]
        return []


class ReducedMapFigure(BaseFigure):
    figure_id = FigureId.FIG_3A
    title = "Region map in the (w_ee, w_ie) plane"

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.SCAN,
                name="map",
                weights=FIG1_WEIGHTS,
                scan=ScanSection(
                    x=AxisSection("w_ee", 0.0, 20.0, 40), y=AxisSection("w_ie", 0.0, 20.0, 40)
                ),
            )
        ]

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        region_map = runs["map"].outputs["region_map"]
        failures = []
        if missing := {RegionLabel.O, RegionLabel.P, RegionLabel.T} - region_map.present():
            failures.append(f"labels missing from the map: {sorted(missing)}")
        for j, w_ie in enumerate(region_map.y_axis.values()):
            if not periodic_between(region_map.row(j)):
                failures.append(f"P is not between O and T at w_ie={w_ie:.3g}")
            if w_ie >= 5:
                boundary = region_map.first_crossing(j, {RegionLabel.O}, {RegionLabel.P})
                if not abs(boundary - 6.0) <= 0.5:
                    failures.append(f"O/P boundary at w_ee={boundary:.3g} for w_ie={w_ie:.3g}")
        return failures


class CovarianceProfileFigure(BaseFigure):
    figure_id = FigureId.FIG_3B
    title = "Covariance along lines of constant w_ie"

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.PROFILE,
                name="profile",
                weights=FIG1_WEIGHTS,
                profile=ProfileSection(w_ie=(4.0, 8.0, 12.0, 16.0)),
                integrator=IntegratorSection(t_transient=1500.0, t_measure=500.0),
            )
        ]

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        profile = next(p for p in runs["profile"].outputs["profiles"] if p.line.w_ie == 8.0)
        saddlenode = saddlenode_wee(10.0, 2.0, 8.0, 1.0)
        failures = []
        if (start := profile.at(5.5)) >= 1e-4:
            failures.append(f"c_ee={start:.3g} at w_ee=5.5, expected < 1e-4")
        if float(np.max(profile.c_ee)) <= 1e-4:
            failures.append("c_ee never positive along w_ie=8")
        beyond = profile.c_ee[profile.w_ee >= saddlenode + 0.2]
        if len(beyond) and float(np.max(beyond)) >= 1e-4:
            failures.append(f"c_ee does not vanish past the saddle-node at {saddlenode:.4g}")
        return failures


class RegulationFigure(BaseFigure):
    """Reduced system regulation in the (w_ee, w_ie) plane"""

    regulate: ClassVar[tuple[str, ...]] = ()
    starts: ClassVar[tuple[tuple[float, float], ...]] = ()
    t_end: ClassVar[float] = 4e4

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.REGULATE,
                name=f"start-{k}",
                weights=dataclasses.replace(REGULATION_WEIGHTS, w_ee=w_ee, w_ie=w_ie),
                regulation=RegulationSection(rho=0.1, regulate=self.regulate),
                integrator=IntegratorSection(t_end=self.t_end, sample_every=1.0),
                initial=InitialSection(points=REDUCED_START),
            )
            for k, (w_ee, w_ie) in enumerate(self.starts)
        ]

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        curves = tuple(
            Curve(name, run.outputs["traces"][0].w_ee, run.outputs["traces"][0].w_ie)
            for name, run in runs.items()
        )
        emit_plot(ProfilePlot(self.title, curves, y_label="w_ie"), store, "weights.svg")


class WeightRegulationFigure(RegulationFigure):
    figure_id = FigureId.FIG_4A
    title = "w_ee regulated to the saddle-node line"
    regulate = ("w_ee",)
    starts = ((12.0, 12.0), (18.0, 12.0))

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        target = saddlenode_wee(10.0, 6.0, 12.0, 1.0)
        failures = []
        for name, run in runs.items():
            last = tail(run.outputs["traces"][0])
            if (error := float(np.max(np.abs(last.w_ee - target)))) >= 0.2:
                failures.append(f"{name}: w_ee strays {error:.3g} from {target:.4g}")
            covariance = float(np.mean(last.cov_ee()))
            if not 0.005 <= covariance <= 0.02:
                failures.append(f"{name}: mean c_ee {covariance:.3g} outside [0.005, 0.02]")
        return failures


class InhibitionRegulationFigure(RegulationFigure):
    figure_id = FigureId.FIG_4B
    title = "w_ie regulated to the saddle-node line"
    regulate = ("w_ie",)
    starts = ((14.0, 8.0), (14.0, 24.0))

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        finals = [float(np.mean(tail(run.outputs["traces"][0]).w_ie)) for run in runs.values()]
        if float(np.ptp(finals)) >= 0.5:
            return [f"runs end at different w_ie: {finals}"]
        try:
            w_ee = saddlenode_wee(10.0, 6.0, float(np.mean(finals)), 1.0)
        except NoTangencyError as exc:
            return [f"no saddle-node at the final w_ie: {exc}"]
        return [] if abs(w_ee - 14.0) < 0.3 else [f"saddle-node at {w_ee:.4g}, not near 14"]


class PointGFigure(RegulationFigure):
    figure_id = FigureId.FIG_4C
    title = "Joint regulation of w_ee and w_ie to G"
    regulate = ("w_ee", "w_ie")
    starts = ((12.0, 16.0),)
    t_end = 2e5

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        summary = runs["start-0"].outputs["summaries"][0]
        failures = []
        if (overlap := summary["nullcline_overlap"]) >= 0.02:
            failures.append(f"nullcline overlap metric {overlap:.3g} >= 0.02")
        target = saddlenode_wee(10.0, 6.0, summary["w_ie"], 1.0)
        if abs(summary["w_ee"] - target) >= 0.2:
            failures.append(f"w_ee={summary['w_ee']:.4g} is not on the saddle-node {target:.4g}")
        return failures + two_stage_failures(runs["start-0"].outputs["traces"][0])


class PointGNullclinesFigure(PointGFigure):
    figure_id = FigureId.FIG_5
    title = "Nullclines at G"

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        run = runs["start-0"]
        params = run.outputs["regulation"].system_params(run.outputs["traces"][0].final)
        emit_plot(phase_portrait(self.title, params), store, "nullclines-g.svg")
        store.write_key_values("g-point.txt", run.outputs["summaries"][0])

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        overlap = runs["start-0"].outputs["summaries"][0]["nullcline_overlap"]
        return [] if overlap < 0.02 else [f"nullcline overlap metric {overlap:.3g} >= 0.02"]


class ThresholdMapFigure(BaseFigure):
    figure_id = FigureId.FIG_6A
    title = "Region map in the (w_ee, h_E) plane"

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.SCAN,
                name="map",
                variant=SystemVariant.FULL,
                weights=THRESHOLD_WEIGHTS,
                thresholds=ThresholdsSection(h_e=0.0, h_i=5.0),
                scan=ScanSection(
                    x=AxisSection("w_ee", 0.0, 30.0, 31), y=AxisSection("h_e", -6.0, 12.0, 31)
                ),
            )
        ]

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        region_map = runs["map"].outputs["region_map"]
        expected = {RegionLabel.O_H, RegionLabel.O_M, RegionLabel.O_L, RegionLabel.P, RegionLabel.T}
        failures = []
        if missing := expected - region_map.present():
            failures.append(f"labels missing from the map: {sorted(missing)}")
        high = boundary_points(region_map, RegionLabel.P, RegionLabel.O_H)
        low = boundary_points(region_map, RegionLabel.P, RegionLabel.O_L)
        if not high or not low:
            failures.append(f"P borders O_h at {len(high)} and O_l at {len(low)} places")
            return failures
        # the two boundaries must be separate curves, not one shared edge
        step = max(region_map.x_axis.step, region_map.y_axis.step)
        separation = float(np.hypot(*(np.mean(high, axis=0) - np.mean(low, axis=0))))
        if separation <= step:
            failures.append(f"P/O_h and P/O_l boundaries lie {separation:.3g} apart")
        return failures


class PointFFigure(BaseFigure):
    figure_id = FigureId.FIG_6B
    title = "Regulation of w_ee and h_E to F"
    starts: ClassVar[tuple[tuple[float, float], ...]] = ((8.0, -1.0), (20.0, 5.0), (10.0, -4.0))

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            ScenarioConfig(
                kind=ScenarioKind.REGULATE,
                name=f"start-{k}",
                variant=SystemVariant.FULL,
                weights=dataclasses.replace(THRESHOLD_WEIGHTS, w_ee=w_ee),
                thresholds=ThresholdsSection(h_e=h_e, h_i=5.0),
                regulation=RegulationSection(
                    rho=0.2, eps_he=0.001, theta_he=0.5, regulate=("w_ee", "h_e")
                ),
                integrator=IntegratorSection(t_end=1e5, sample_every=1.0),
                initial=InitialSection(points=FULL_START),
            )
            for k, (w_ee, h_e) in enumerate(self.starts)
        ]

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        curves = tuple(
            Curve(name, run.outputs["traces"][0].w_ee, run.outputs["traces"][0].h_e)
            for name, run in runs.items()
        )
        emit_plot(ProfilePlot(self.title, curves, y_label="h_e"), store, "thresholds.svg")

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        finals = np.array([[s["w_ee"], s["h_e"]] for s in self._summaries(runs)])
        failures = []
        diameter = max(float(np.hypot(*(a - b))) for a in finals for b in finals)
        if diameter >= 0.3:
            failures.append(f"(w_ee, h_e) end points spread {diameter:.3g} >= 0.3")
        for name, run in runs.items():
            mean_s = float(np.mean(tail(run.outputs["traces"][0]).s))
            if abs(mean_s - 0.5) > 0.05:
                failures.append(f"{name}: time-averaged s is {mean_s:.3g}, expected 0.5 +- 0.05")
        return failures

    @staticmethod
    def _summaries(runs: dict[str, RunResult]) -> list[dict]:
        return [run.outputs["summaries"][0] for run in runs.values()]


class PointFNullclinesFigure(BaseFigure):
    figure_id = FigureId.FIG_6C
    title = "Nullclines at F"

    def scenarios(self) -> list[ScenarioConfig]:
        return PointFFigure().scenarios()[:1]

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        run = runs["start-0"]
        params = run.outputs["regulation"].system_params(run.outputs["traces"][0].final)
        emit_plot(phase_portrait(self.title, params), store, "nullclines-f.svg")
        store.write_key_values("f-point.txt", run.outputs["summaries"][0])

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        last = tail(runs["start-0"].outputs["traces"][0])
        failures = []
        mean_s = float(np.mean(last.s))
        if abs(mean_s - 0.5) > 0.05:
            failures.append(f"time-averaged s is {mean_s:.3g}, expected 0.5 +- 0.05")
        for name in ("w_ee", "h_e"):
            if (amplitude := float(np.ptp(last.column(name)))) >= 0.5:
                failures.append(f"{name} still moves by {amplitude:.3g} at F")
        return failures


class StandardFigure(BaseFigure):
    figure_id = FigureId.FIG_7
    title = "Four-parameter regulation, (w_ee, w_ie) projection"
    starts: ClassVar[tuple[tuple[float, float], ...]] = ((14.0, 14.0), (20.0, 10.0), (12.0, 24.0))

    def scenarios(self) -> list[ScenarioConfig]:
        return [
            standard_scenario(f"start-{k}", w_ee, w_ie, FULL_START[0])
            for k, (w_ee, w_ie) in enumerate(self.starts)
        ]

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        curves = tuple(
            Curve(name, run.outputs["traces"][0].w_ee, run.outputs["traces"][0].w_ie)
            for name, run in runs.items()
        )
        emit_plot(ProfilePlot(self.title, curves, y_label="w_ie"), store, "weights.svg")

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        return periodic_failures(runs["start-0"].outputs["traces"][0], "start-0")


class LateBehaviorFigure(BaseFigure):
    """s(t) of the regulated full system after it reached the critical surface"""

    changes: ClassVar[dict[str, float]] = {}
    start: ClassVar[tuple[float, float, tuple[float, float]]] = (14.0, 14.0, FULL_START[0])

    def initial(self) -> tuple[float, float, tuple[float, float]]:
        return self.start

    def scenarios(self) -> list[ScenarioConfig]:
        w_ee, w_ie, activity = self.initial()
        return [standard_scenario("standard", w_ee, w_ie, activity, **self.changes)]

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        last = tail(runs["standard"].outputs["traces"][0], fraction=0.05)
        emit_plot(TimeSeriesPlot(self.title, last.times, {"s": last.s}), store, "s-window.svg")


class SimplePeriodicFigure(LateBehaviorFigure):
    figure_id = FigureId.FIG_8A
    title = "Simple periodic attractor (standard set)"

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        return periodic_failures(runs["standard"].outputs["traces"][0], "standard")


class QuasiPeriodicFigure(LateBehaviorFigure):
    figure_id = FigureId.FIG_8B
    title = "Quasi-periodic attractor"
    changes = {"eps_he": 0.0051, "eps_hi": 0.0046, "theta_ee": 0.011}

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        last = tail(runs["standard"].outputs["traces"][0], fraction=0.5)
        failures = []
        if estimate_period(last.times, last.s).periodic:
            failures.append("s(t) is simple periodic")
        for name in ("w_ee", "w_ie"):
            values = last.column(name)
            if not np.all(np.isfinite(values)) or float(np.ptp(values)) >= 2.0:
                failures.append(f"{name} wanders over {float(np.ptp(values)):.3g} >= 2")
        return failures


class ChaoticFigure(LateBehaviorFigure):
    """The start is screened from CHAOTIC_CANDIDATES by `prepare` before the full run"""

    figure_id = FigureId.FIG_8C
    title = "Irregular switching between phases"
    changes = {"eps_he": 0.005, "eps_hi": 0.005}

    def __init__(self) -> None:
        self.chosen = CHAOTIC_CANDIDATES[0]

    def initial(self) -> ChaoticStart:
        return self.chosen

    def prepare(self, workers: int = WORKERS) -> dict[str, Any]:
        self.chosen = first_passing(CHAOTIC_CANDIDATES, _screen_chaotic, workers)
        w_ee, w_ie, (s, sigma) = self.chosen
        return {
            "w_ee": w_ee, "w_ie": w_ie, "s": s, "sigma": sigma, "screen_t_end": CHAOTIC_SCREEN_T_END
        }

    def render(self, runs: dict[str, RunResult], store: ArtifactStore) -> None:
        super().render(runs, store)
        run = runs["standard"]
        trace = run.outputs["traces"][0]
        middle = trace.snapshot(len(trace) // 2)
        estimate = largest_lyapunov(
            run.outputs["regulation"], middle, t_end=2e4, dt=run.config.integrator.dt
        )
        store.write_csv(
            "lyapunov.csv", ("t", "running_exponent"), zip(estimate.times, estimate.running)
        )
        store.write_key_values("lyapunov.txt", {"largest_exponent": estimate.exponent})

    def check(self, runs: dict[str, RunResult]) -> list[str]:
        return irregular_failures(runs["standard"].outputs["traces"][0])


def with_overrides(
    config: ScenarioConfig, overrides: list[str], flags: dict | None = None
) -> ScenarioConfig:
    if not overrides and not any(value is not None for value in (flags or {}).values()):
        return config
    return parse_scenario(yaml.safe_dump(config.to_dict()), overrides, flags)


def reproduce_figure(
    figure_id: FigureId | str,
    root: Path | None = None,
    workers: int = WORKERS,
    check: bool = False,
    overrides: list[str] | None = None,
    flags: dict | None = None,
) -> FigureResult:
    """
    Runs every scenario of a built-in figure into one directory, renders the figure plots and,
    with `check`, evaluates its acceptance checks (CheckFailedError when any fails)
    """
    figure = BaseFigure.get_figures()[FigureId(figure_id)]()
    chosen = figure.prepare(workers)
    scenarios = [with_overrides(s, overrides or [], flags) for s in figure.scenarios()]
    store = ArtifactStore.for_run(
        f"figure-{figure.figure_id}", [s.to_dict() for s in scenarios], root
    )
    if chosen:
        store.write_key_values("search.txt", chosen)
    logger.info(
        "Reproducing figure %(id)s (%(title)s): %(count)s scenarios",
        {"id": figure.figure_id, "title": figure.title, "count": len(scenarios)},
    )

    runs: dict[str, RunResult] = {}
    try:
        for scenario in scenarios:
            runs[scenario.name] = run_scenario(
                scenario, store, prefix=f"{scenario.name}-", workers=workers, manifest=False
            )
        figure.render(runs, store)
    finally:
        store.write_manifest(
            {"figure": str(figure.figure_id), "scenarios": [s.to_dict() for s in scenarios]},
            seed=next((s.seed for s in scenarios if s.kind is ScenarioKind.SIMULATE), None),
            dt=scenarios[0].integrator.dt if scenarios else None,
        )

    result = FigureResult(figure_id=figure.figure_id, store=store, runs=runs)
    if check:
        result.failures = figure.check(runs)
        for failure in result.failures:
            logger.warning("Figure %s check failed: %s", figure.figure_id, failure)
        if result.failures:
            raise CheckFailedError(
                f"Figure {figure.figure_id}: {len(result.failures)} checks failed",
                result.failures,
            )
    return result
