"""Dispatch of a validated scenario to the simulation and analysis layers, with artifact output"""

import dataclasses
import logging
from pathlib import Path
from typing import Any, Callable

import numpy as np

from src.analysis.bifurcations import (
    nullcline_overlap_metric,
    pitchfork_boundary_wee,
    saddlenode_wee,
)
from src.analysis.fixed_points import FixedPoint, find_fixed_points
from src.analysis.profiles import covariance_profile
from src.analysis.region_map import Axis, BifurcationMap, scan_region_map
from src.config.app import WORKERS, ScenarioKind, SystemVariant
from src.dynamics.core import bogdanov_takens_point, hopf_threshold_wee, nullcline_curves
from src.dynamics.models import SystemParams
from src.evolution.integrator import planar_trajectories
from src.evolution.regulation import STATE_FIELDS, RegulationConfig, Trace, integrate
from src.exceptions import DegenerateError, NoTangencyError, NonFiniteError, ScanQualityError
from src.glauber.network import simulate
from src.harness.plotting import (
    Curve,
    PhasePortraitPlot,
    ProfilePlot,
    RegionMapPlot,
    TimeSeriesPlot,
    emit_plot,
)
from src.harness.scenario import ScenarioConfig
from src.storage.artifacts import ArtifactStore

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("s", "sigma", "s_bar", "sigma_bar", "w_ee", "w_ie", "h_e", "h_i")
OVERLAY_POINTS = 60


@dataclasses.dataclass
class RunResult:
    config: ScenarioConfig
    store: ArtifactStore
    outputs: dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def artifacts(self) -> list[Path]:
        return list(self.store.written)


def nullcline_overlays(params: SystemParams) -> tuple[Curve, ...]:
    try:
        s_x, s_y, sig_x, sig_y = nullcline_curves(params)
    except DegenerateError as exc:
        logger.debug("No nullclines to draw: %s", exc)
        return ()
    return Curve("s-nullcline", s_x, s_y), Curve("sigma-nullcline", sig_x, sig_y)


def phase_portrait(
    title: str,
    params: SystemParams,
    trajectories: tuple[np.ndarray, ...] = (),
    fixed_points: list[FixedPoint] | None = None,
) -> PhasePortraitPlot:
    return PhasePortraitPlot(
        title=title,
        box=params.box,
        nullclines=nullcline_overlays(params),
        trajectories=trajectories,
        points=tuple(tuple(point.location) for point in fixed_points or ()),
    )


def critical_lines(params: SystemParams, w_ie_axis: Axis) -> tuple[Curve, ...]:
    """Hopf, pitchfork and saddle-node lines of the reduced system over a (w_ee, w_ie) map"""
    w = params.weights
    temperature = params.temperature
    w_ie = np.linspace(w_ie_axis.low, w_ie_axis.high, OVERLAY_POINTS)
    _, w_ie_bt = bogdanov_takens_point(w.w_ei, w.w_ii, temperature)

    hopf_w_ie = w_ie[w_ie >= w_ie_bt]
    hopf = Curve(
        "hopf", np.full(len(hopf_w_ie), hopf_threshold_wee(w.w_ii, temperature)), hopf_w_ie
    )
    pitchfork = Curve(
        "pitchfork",
        np.array([pitchfork_boundary_wee(w.w_ei, w.w_ii, y, temperature) for y in w_ie]),
        w_ie,
    )

    sn_w_ee, sn_w_ie = [], []
    for y in hopf_w_ie:
        try:
            sn_w_ee.append(saddlenode_wee(w.w_ei, w.w_ii, float(y), temperature))
            sn_w_ie.append(float(y))
        except NoTangencyError:
            continue
    saddlenode = Curve("saddlenode", np.array(sn_w_ee), np.array(sn_w_ie))
    return hopf, pitchfork, saddlenode


def write_trace(store: ArtifactStore, stem: str, trace: Trace) -> None:
    columns = [STATE_FIELDS.index(name) for name in TRACE_COLUMNS]
    rows = (
        (t, *state[columns].tolist()) for t, state in zip(trace.times.tolist(), trace.states)
    )
    store.write_csv(f"{stem}.csv", ("t", *TRACE_COLUMNS), rows)
    store.write_key_values(f"{stem}.txt", trace.metadata)


def trace_plot(title: str, trace: Trace, variant: SystemVariant) -> TimeSeriesPlot:
    series = {"s": trace.s, "sigma": trace.sigma, "w_ee": trace.w_ee, "w_ie": trace.w_ie}
    if variant is SystemVariant.FULL:
        series.update({"h_e": trace.h_e, "h_i": trace.column("h_i")})
    return TimeSeriesPlot(title=title, times=trace.times, series=series)


def _simulate(config: ScenarioConfig, store: ArtifactStore, prefix: str) -> dict[str, Any]:
    trace = simulate(config.glauber_config())
    store.write_csv(f"{prefix}trace.csv", ("t", "mean_e", "mean_i"), trace.rows())
    series = {"mean_e": trace.mean_e, "mean_i": trace.mean_i}
    emit_plot(TimeSeriesPlot(config.name, trace.times, series), store, f"{prefix}trace.svg")
    return {"population_trace": trace}


def _meanfield(config: ScenarioConfig, store: ArtifactStore, prefix: str) -> dict[str, Any]:
    params = config.system_params()
    integrator = config.integrator
    samples = planar_trajectories(
        params,
        np.asarray(config.initial.points, dtype=float),
        integrator.dt,
        0.0,
        integrator.t_end,
        integrator.sample_every,
    )
    stride = max(1, int(round(integrator.sample_every / integrator.dt)))
    times = np.arange(samples.shape[1]) * stride * integrator.dt
    for k, trajectory in enumerate(samples):
        rows = zip(times.tolist(), trajectory[:, 0].tolist(), trajectory[:, 1].tolist())
        store.write_csv(f"{prefix}trajectory-{k}.csv", ("t", "s", "sigma"), rows)

    fixed_points = find_fixed_points(params)
    write_fixed_points(store, f"{prefix}fixed-points.csv", fixed_points)
    emit_plot(
        phase_portrait(config.name, params, tuple(samples), fixed_points),
        store,
        f"{prefix}phase-portrait.svg",
    )
    return {"times": times, "trajectories": samples, "fixed_points": fixed_points}


def write_fixed_points(store: ArtifactStore, filename: str, points: list[FixedPoint]) -> None:
    header = ("s", "sigma", "stability", "eig1_re", "eig1_im", "eig2_re", "eig2_im")
    rows = []
    for point in points:
        first, second = point.stability.eigenvalues
        rows.append(
            (
                *point.location,
                point.stability.stability,
                first.real,
                first.imag,
                second.real,
                second.imag,
            )
        )
    store.write_csv(filename, header, rows)


def _fixed_points(config: ScenarioConfig, store: ArtifactStore, prefix: str) -> dict[str, Any]:
    params = config.system_params()
    points = find_fixed_points(params)
    write_fixed_points(store, f"{prefix}fixed-points.csv", points)
    emit_plot(
        phase_portrait(config.name, params, fixed_points=points),
        store,
        f"{prefix}fixed-points.svg",
    )
    return {"fixed_points": points}


def terminal_summary(config: RegulationConfig, trace: Trace) -> dict[str, Any]:
    final = trace.final
    summary: dict[str, Any] = {
        "t": final.t,
        "w_ee": final.w_ee,
        "w_ie": final.w_ie,
        "h_e": final.h_e,
        "h_i": final.h_i,
        "clamp_events": trace.metadata.get("clamp_events", "0"),
    }
    params = config.system_params(final)
    reduced = params.variant is SystemVariant.REDUCED
    if reduced and final.w_ie > 0 and config.w_ei > 0 and config.beta > 0:
        summary["nullcline_overlap"] = nullcline_overlap_metric(params)
    return summary


def _regulate(config: ScenarioConfig, store: ArtifactStore, prefix: str) -> dict[str, Any]:
    regulation = config.regulation_config()
    integrator = config.integrator
    traces, summaries = [], []
    for k, init in enumerate(config.initial_states()):
        stem = f"{prefix}regulation-{k}"
        try:
            trace = integrate(
                regulation,
                init,
                dt=integrator.dt,
                t_end=integrator.t_end,
                sample_every=integrator.sample_every,
            )
        except NonFiniteError as exc:
            if isinstance(exc.partial, Trace) and len(exc.partial):
                write_trace(store, stem, exc.partial)
            raise
        write_trace(store, stem, trace)
        plot = trace_plot(f"{config.name} #{k}", trace, regulation.variant)
        emit_plot(plot, store, f"{stem}.svg")
        summary = terminal_summary(regulation, trace)
        store.write_key_values(f"{stem}-summary.txt", summary)
        traces.append(trace)
        summaries.append(summary)
    return {"traces": traces, "summaries": summaries, "regulation": regulation}


def write_region_map(store: ArtifactStore, stem: str, plot: RegionMapPlot) -> None:
    region_map = plot.region_map
    header = (region_map.x_axis.name, region_map.y_axis.name, "label")
    store.write_csv(f"{stem}.csv", header, region_map.cells())
    emit_plot(plot, store, f"{stem}.svg")


def region_map_plot(
    title: str, region_map: BifurcationMap, params: SystemParams
) -> RegionMapPlot:
    overlays: tuple[Curve, ...] = ()
    names = (region_map.x_axis.name, region_map.y_axis.name)
    if params.variant is SystemVariant.REDUCED and names == ("w_ee", "w_ie") and params.beta > 0:
        overlays = critical_lines(params, region_map.y_axis)
    return RegionMapPlot(title=title, region_map=region_map, overlays=overlays)


def _scan(
    config: ScenarioConfig, store: ArtifactStore, prefix: str, workers: int = WORKERS
) -> dict[str, Any]:
    params = config.system_params()
    try:
        region_map = scan_region_map(
            config.scan_axes(),
            params,
            options=config.scan_options(),
            workers=workers,
            max_unclassified=config.scan.max_unclassified,
        )
    except ScanQualityError as exc:
        if exc.region_map is not None:
            write_region_map(
                store, f"{prefix}region-map", region_map_plot(config.name, exc.region_map, params)
            )
        raise
    plot = region_map_plot(config.name, region_map, params)
    write_region_map(store, f"{prefix}region-map", plot)
    return {"region_map": region_map}


def _profile(config: ScenarioConfig, store: ArtifactStore, prefix: str) -> dict[str, Any]:
    integrator = config.integrator
    profiles = [
        covariance_profile(
            line,
            t_transient=integrator.t_transient,
            t_measure=integrator.t_measure,
            dt=integrator.dt,
        )
        for line in config.profile_lines()
    ]
    header = ("w_ie", "w_ee", "c_ee", "c_bar_ee", "c_bar_ie")
    store.write_csv(
        f"{prefix}profile.csv", header, [row for profile in profiles for row in profile.rows()]
    )
    curves = tuple(
        Curve(f"w_ie={profile.line.w_ie:g}", profile.w_ee, profile.c_ee) for profile in profiles
    )
    emit_plot(ProfilePlot(config.name, curves), store, f"{prefix}profile.svg")
    return {"profiles": profiles}


RUNNERS: dict[ScenarioKind, Callable[..., dict[str, Any]]] = {
    ScenarioKind.SIMULATE: _simulate,
    ScenarioKind.MEANFIELD: _meanfield,
    ScenarioKind.REGULATE: _regulate,
    ScenarioKind.FIXED_POINTS: _fixed_points,
    ScenarioKind.SCAN: _scan,
    ScenarioKind.PROFILE: _profile,
}


def store_for(config: ScenarioConfig, root: Path | None = None) -> ArtifactStore:
    if root is None and config.output_dir:
        root = Path(config.output_dir)
    return ArtifactStore.for_run(config.name, config.to_dict(), root)


def run_scenario(
    config: ScenarioConfig,
    store: ArtifactStore | None = None,
    prefix: str = "",
    workers: int = WORKERS,
    manifest: bool = True,
) -> RunResult:
    """
    Runs one scenario and writes its artifacts

    :param config: validated scenario
    :param store: destination; by default a fresh directory named after the scenario and its hash
    :param prefix: prepended to every file name (several scenarios sharing one store)
    :param workers: process pool size for region scans
    :param manifest: write manifest.txt once the run finished (also after a failure)
    :return <RunResult> with the in-memory outputs of the run
    """
    store = store or store_for(config)
    logger.info(
        "Running %(kind)s scenario %(name)s into %(dir)s",
        {"kind": config.kind, "name": config.name, "dir": store.run_dir},
    )
    runner = RUNNERS[config.kind]
    extra = {"workers": workers} if config.kind is ScenarioKind.SCAN else {}
    try:
        outputs = runner(config, store, prefix, **extra)
    finally:
        if manifest:
            write_manifest(store, config)
    return RunResult(config=config, store=store, outputs=outputs)


def write_manifest(store: ArtifactStore, config: ScenarioConfig) -> Path:
    seed = config.seed if config.kind is ScenarioKind.SIMULATE else None
    dt = None if config.kind is ScenarioKind.SIMULATE else config.integrator.dt
    return store.write_manifest(config.to_dict(), seed=seed, dt=dt)
