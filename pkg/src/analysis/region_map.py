"""Two-parameter region maps built from per-cell attractor detection"""

import dataclasses
import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np

from src.analysis.attractors import AttractorKind, AttractorReport, detect_attractors
from src.config.app import WORKERS, SystemVariant
from src.dynamics.models import SystemParams
from src.exceptions import DomainError, ScanQualityError

logger = logging.getLogger(__name__)

SCANNABLE = ("w_ee", "w_ie", "h_e")
MIN_GRID = 10
MAX_UNCLASSIFIED = 0.05
HIGH_CUT = 0.8
LOW_CUT = 0.2


class RegionLabel(enum.StrEnum):
    O = "O"  # noqa: E741
    O_H = "O_h"
    O_M = "O_m"
    O_L = "O_l"
    P = "P"
    T = "T"
    THREE_ATTRACTOR_STRIP = "ThreeAttractorStrip"
    HOPF_COEXISTENCE = "HopfCoexistence"
    UNCLASSIFIED = "Unclassified"

    @property
    def is_single_point(self) -> bool:
        return self in (RegionLabel.O, RegionLabel.O_H, RegionLabel.O_M, RegionLabel.O_L)


class Axis(NamedTuple):
    name: str
    low: float
    high: float
    size: int

    def values(self) -> np.ndarray:
        return np.linspace(self.low, self.high, self.size)

    @property
    def step(self) -> float:
        return (self.high - self.low) / (self.size - 1) if self.size > 1 else 0.0


def apply_parameter(params: SystemParams, name: str, value: float) -> SystemParams:
    if name == "h_e":
        return params.with_thresholds(h_e=value)
    return params.with_weights(**{name: value})


def label_for(report: AttractorReport, params: SystemParams) -> RegionLabel:
    match report.kind:
        case AttractorKind.SINGLE_POINT:
            if params.variant is SystemVariant.REDUCED:
                return RegionLabel.O
            # subdivision of the single-attractor region by the activity level
            s_star = report.points[0].s
            if s_star > HIGH_CUT:
                return RegionLabel.O_H
            return RegionLabel.O_L if s_star < LOW_CUT else RegionLabel.O_M
        case AttractorKind.LIMIT_CYCLE:
            return RegionLabel.P
        case AttractorKind.TWO_POINTS:
            return RegionLabel.T
        case AttractorKind.THREE_COEXISTING:
            return RegionLabel.THREE_ATTRACTOR_STRIP
        case AttractorKind.CYCLE_AND_POINT:
            return RegionLabel.HOPF_COEXISTENCE
    return RegionLabel.UNCLASSIFIED


@dataclasses.dataclass(frozen=True)
class BifurcationMap:
    """labels[j][i] is the cell at (x_axis.values()[i], y_axis.values()[j])"""

    x_axis: Axis
    y_axis: Axis
    labels: tuple[tuple[RegionLabel, ...], ...]
    fixed: dict[str, float]
    variant: SystemVariant

    def __post_init__(self) -> None:
        if len(self.labels) != self.y_axis.size or any(
            len(row) != self.x_axis.size for row in self.labels
        ):
            raise DomainError("Label grid does not match the axis sizes")

    def cells(self):
        for j, y in enumerate(self.y_axis.values()):
            for i, x in enumerate(self.x_axis.values()):
                yield float(x), float(y), self.labels[j][i]

    def present(self) -> set[RegionLabel]:
        return {label for row in self.labels for label in row}

    def fraction(self, label: RegionLabel) -> float:
        total = self.x_axis.size * self.y_axis.size
        return sum(row.count(label) for row in self.labels) / total

    def row(self, j: int) -> tuple[RegionLabel, ...]:
        return self.labels[j]

    def first_crossing(self, j: int, before: set[RegionLabel], after: set[RegionLabel]) -> float:
        """
        Midpoint between the last `before` cell and the first `after` cell scanning row j
        left to right; nan when the row has no such pair of neighbors.
        """
        xs = self.x_axis.values()
        row = self.labels[j]
        for i in range(len(row) - 1):
            if row[i] in before and row[i + 1] in after:
                return float(0.5 * (xs[i] + xs[i + 1]))
        return float("nan")


@dataclasses.dataclass(frozen=True)
class ScanOptions:
    t_transient: float = 500.0
    t_measure: float = 500.0
    dense: bool = False
    dt: float = 0.01


def _classify_cell(task: tuple[SystemParams, ScanOptions]) -> RegionLabel:
    params, options = task
    report = detect_attractors(
        params,
        t_transient=options.t_transient,
        t_measure=options.t_measure,
        dense=options.dense,
        dt=options.dt,
    )
    return label_for(report, params)


def scan_region_map(
    axes: tuple[Axis, Axis],
    fixed_params: SystemParams,
    variant: SystemVariant | None = None,
    options: ScanOptions | None = None,
    workers: int = WORKERS,
    max_unclassified: float = MAX_UNCLASSIFIED,
) -> BifurcationMap:
    """
    Classifies every cell of the x/y grid. Cells run in a process pool; results are assembled
    in grid order. More than `max_unclassified` unclassified cells raise ScanQualityError,
    which carries the finished map.
    """
    x_axis, y_axis = axes
    variant = SystemVariant(variant or fixed_params.variant)
    if variant is not fixed_params.variant:
        raise DomainError(f"Fixed parameters are {fixed_params.variant}, scan asks for {variant}")
    for axis in axes:
        if axis.name not in SCANNABLE:
            raise DomainError(f"Cannot scan {axis.name!r}, expected one of {SCANNABLE}")
        if axis.size < MIN_GRID:
            raise DomainError(f"Axis {axis.name} needs at least {MIN_GRID} points")
        if axis.name == "h_e" and variant is not SystemVariant.FULL:
            raise DomainError("h_e can only be scanned in the full system")
    if x_axis.name == y_axis.name:
        raise DomainError("Scan axes must be two distinct parameters")

    options = options or ScanOptions()
    tasks = [
        (apply_parameter(apply_parameter(fixed_params, x_axis.name, x), y_axis.name, y), options)
        for y in y_axis.values()
        for x in x_axis.values()
    ]
    logger.info(
        "Scanning %(cells)s cells (%(x)s x %(y)s) with %(workers)s workers",
        {"cells": len(tasks), "x": x_axis.name, "y": y_axis.name, "workers": workers},
    )

    if workers > 1:
        chunksize = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            flat = list(executor.map(_classify_cell, tasks, chunksize=chunksize))
    else:
        flat = [_classify_cell(task) for task in tasks]

    labels = tuple(
        tuple(flat[j * x_axis.size : (j + 1) * x_axis.size]) for j in range(y_axis.size)
    )
    fixed = {
        **fixed_params.weights.as_dict(),
        "beta": fixed_params.beta,
        **({"h_e": fixed_params.h_e, "h_i": fixed_params.h_i} if fixed_params.thresholds else {}),
    }
    for axis in axes:
        fixed.pop(axis.name, None)
    region_map = BifurcationMap(
        x_axis=x_axis, y_axis=y_axis, labels=labels, fixed=fixed, variant=variant
    )

    unclassified = region_map.fraction(RegionLabel.UNCLASSIFIED)
    if unclassified:
        logger.warning("%.1f%% of the cells are unclassified", 100 * unclassified)
    if unclassified > max_unclassified:
        raise ScanQualityError(
            f"{unclassified:.1%} unclassified cells exceed the {max_unclassified:.0%} limit",
            region_map=region_map,
        )
    return region_map
