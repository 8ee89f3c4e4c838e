"""
Standalone SVG plots built with lxml: time series, phase portraits, region maps and covariance
profiles. `plot_csv` re-renders a CSV artifact of this tool by recognizing its header.
"""

import dataclasses
import logging
import math
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from lxml import etree

from src.analysis.region_map import Axis, BifurcationMap, RegionLabel
from src.config.app import SystemVariant
from src.exceptions import UnsupportedArtifactError
from src.storage.artifacts import ArtifactStore, read_csv

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
MAX_POLYLINE_POINTS = 4000

REGION_COLORS = {
    RegionLabel.O: "#9ecae1",
    RegionLabel.O_H: "#fdae6b",
    RegionLabel.O_M: "#9ecae1",
    RegionLabel.O_L: "#3182bd",
    RegionLabel.P: "#a1d99b",
    RegionLabel.T: "#e6550d",
    RegionLabel.THREE_ATTRACTOR_STRIP: "#756bb1",
    RegionLabel.HOPF_COEXISTENCE: "#fdd0a2",
    RegionLabel.UNCLASSIFIED: "#ffffff",
}


@dataclasses.dataclass(frozen=True)
class PlotStyle:
    width: int = 720
    height: int = 480
    margin: int = 60
    font_size: int = 12
    stroke_width: float = 1.2
    palette: tuple[str, ...] = (
        "#1f77b4",
        "#d62728",
        "#2ca02c",
        "#ff7f0e",
        "#9467bd",
        "#8c564b",
    )


class Curve(NamedTuple):
    label: str
    xs: np.ndarray
    ys: np.ndarray


@dataclasses.dataclass(frozen=True)
class TimeSeriesPlot:
    title: str
    times: np.ndarray
    series: dict[str, np.ndarray]
    x_label: str = "t"


@dataclasses.dataclass(frozen=True)
class PhasePortraitPlot:
    title: str
    box: tuple[float, float]
    nullclines: tuple[Curve, ...] = ()
    trajectories: tuple[np.ndarray, ...] = ()
    points: tuple[tuple[float, float], ...] = ()
    x_label: str = "s"
    y_label: str = "sigma"


@dataclasses.dataclass(frozen=True)
class RegionMapPlot:
    title: str
    region_map: BifurcationMap
    overlays: tuple[Curve, ...] = ()


@dataclasses.dataclass(frozen=True)
class ProfilePlot:
    title: str
    curves: tuple[Curve, ...]
    x_label: str = "w_ee"
    y_label: str = "c_ee"


class Canvas:
    """Maps data coordinates to pixels inside the plot frame"""

    def __init__(
        self,
        x_range: tuple[float, float],
        y_range: tuple[float, float],
        style: PlotStyle,
        title: str,
    ) -> None:
        self.style = style
        self.x_range = _padded(x_range)
        self.y_range = _padded(y_range)
        self.root = etree.Element(
            f"{{{SVG_NS}}}svg",
            nsmap={None: SVG_NS},
            width=str(style.width),
            height=str(style.height),
            viewBox=f"0 0 {style.width} {style.height}",
        )
        self.add("rect", x=0, y=0, width=style.width, height=style.height, fill="white")
        self.text(style.width / 2, style.margin / 2, title, "middle", style.font_size + 2)

    @property
    def inner_width(self) -> float:
        return self.style.width - 2 * self.style.margin

    @property
    def inner_height(self) -> float:
        return self.style.height - 2 * self.style.margin

    def add(self, tag: str, parent: etree._Element | None = None, **attributes: object):
        # attribute names use "_" for "-" (stroke_width -> stroke-width)
        attrib = {
            name.rstrip("_").replace("_", "-"): f"{v:.2f}" if isinstance(v, float) else str(v)
            for name, v in attributes.items()
        }
        return etree.SubElement(
            self.root if parent is None else parent, f"{{{SVG_NS}}}{tag}", attrib=attrib
        )

    def px(self, x: float) -> float:
        low, high = self.x_range
        return self.style.margin + (x - low) / (high - low) * self.inner_width

    def py(self, y: float) -> float:
        low, high = self.y_range
        return self.style.height - self.style.margin - (y - low) / (high - low) * self.inner_height

    def text(
        self,
        x: float,
        y: float,
        content: str,
        anchor: str = "start",
        size: int | None = None,
        parent: etree._Element | None = None,
    ):
        element = self.add(
            "text",
            parent,
            x=float(x),
            y=float(y),
            text_anchor=anchor,
            font_size=size or self.style.font_size,
            font_family="sans-serif",
        )
        element.text = content
        return element

    def axes(self, x_label: str, y_label: str) -> None:
        margin, width, height = self.style.margin, self.style.width, self.style.height
        group = self.add("g", class_="axes")
        frame = {"width": self.inner_width, "height": self.inner_height}
        self.add("rect", group, x=margin, y=margin, **frame, fill="none", stroke="black")
        for value in np.linspace(*self.x_range, 5):
            x = self.px(value)
            self.add("line", group, x1=x, x2=x, y1=height - margin, y2=height - margin + 5,
                     stroke="black")
            self.text(x, height - margin + 18, f"{value:.3g}", "middle", parent=group)
        for value in np.linspace(*self.y_range, 5):
            y = self.py(value)
            self.add("line", group, x1=margin - 5, x2=margin, y1=y, y2=y, stroke="black")
            self.text(margin - 8, y + 4, f"{value:.3g}", "end", parent=group)
        self.text(width / 2, height - 15, x_label, "middle", parent=group)
        self.text(15, height / 2, y_label, "middle", parent=group)

    def polyline(self, xs: np.ndarray, ys: np.ndarray, color: str, label: str = ""):
        xs, ys = _thinned(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
        keep = np.isfinite(xs) & np.isfinite(ys)
        points = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs[keep], ys[keep]))
        return self.add(
            "polyline",
            points=points,
            fill="none",
            stroke=color,
            stroke_width=self.style.stroke_width,
            data_label=label,
        )

    def marker(self, x: float, y: float, color: str, radius: float = 3.5):
        return self.add("circle", cx=self.px(x), cy=self.py(y), r=radius, fill=color)

    def cell(self, x0: float, y0: float, x1: float, y1: float, color: str, label: str):
        left, right = sorted((self.px(x0), self.px(x1)))
        top, bottom = sorted((self.py(y0), self.py(y1)))
        return self.add(
            "rect",
            x=left,
            y=top,
            width=right - left,
            height=bottom - top,
            fill=color,
            class_="cell",
            data_label=label,
        )

    def legend(self, entries: Sequence[tuple[str, str]]) -> None:
        group = self.add("g", class_="legend")
        x = float(self.style.width - self.style.margin + 8)
        for k, (label, color) in enumerate(entries):
            y = float(self.style.margin + 16 * k)
            self.add("rect", group, x=x, y=y, width=10, height=10, fill=color, stroke="black")
            self.text(x + 14, y + 9, label, size=self.style.font_size - 2, parent=group)


def _padded(bounds: tuple[float, float]) -> tuple[float, float]:
    low, high = (float(b) for b in bounds)
    if not (math.isfinite(low) and math.isfinite(high)):
        return 0.0, 1.0
    if high <= low:
        return low - 0.5, low + 0.5
    return low, high


def _thinned(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(xs) <= MAX_POLYLINE_POINTS:
        return xs, ys
    step = int(math.ceil(len(xs) / MAX_POLYLINE_POINTS))
    return xs[::step], ys[::step]


def _bounds(arrays: Sequence[np.ndarray], default: tuple[float, float] = (0.0, 1.0)):
    finite = [a[np.isfinite(a)] for a in arrays if len(a)]
    finite = [a for a in finite if len(a)]
    if not finite:
        return default
    return min(float(a.min()) for a in finite), max(float(a.max()) for a in finite)


def _time_series(plot: TimeSeriesPlot, style: PlotStyle) -> etree._Element:
    canvas = Canvas(
        _bounds([np.asarray(plot.times, dtype=float)]),
        _bounds([np.asarray(v, dtype=float) for v in plot.series.values()]),
        style,
        plot.title,
    )
    canvas.axes(plot.x_label, "value")
    entries = []
    for k, (name, values) in enumerate(plot.series.items()):
        color = style.palette[k % len(style.palette)]
        if len(values):
            canvas.polyline(plot.times, values, color, label=name)
        entries.append((name, color))
    canvas.legend(entries)
    return canvas.root


def _phase_portrait(plot: PhasePortraitPlot, style: PlotStyle) -> etree._Element:
    canvas = Canvas(plot.box, plot.box, style, plot.title)
    canvas.axes(plot.x_label, plot.y_label)
    entries = []
    for k, curve in enumerate(plot.nullclines):
        color = style.palette[k % len(style.palette)]
        canvas.polyline(curve.xs, curve.ys, color, label=curve.label)
        entries.append((curve.label, color))
    for trajectory in plot.trajectories:
        canvas.polyline(trajectory[:, 0], trajectory[:, 1], "#555555", label="trajectory")
    for s, sigma in plot.points:
        canvas.marker(s, sigma, "black")
    canvas.legend(entries)
    return canvas.root


def _region_map(plot: RegionMapPlot, style: PlotStyle) -> etree._Element:
    region_map = plot.region_map
    x_axis, y_axis = region_map.x_axis, region_map.y_axis
    half_x, half_y = 0.5 * x_axis.step, 0.5 * y_axis.step
    canvas = Canvas(
        (x_axis.low - half_x, x_axis.high + half_x),
        (y_axis.low - half_y, y_axis.high + half_y),
        style,
        plot.title,
    )
    for x, y, label in region_map.cells():
        canvas.cell(
            x - half_x, y - half_y, x + half_x, y + half_y, REGION_COLORS[label], str(label)
        )
    for k, curve in enumerate(plot.overlays):
        color = style.palette[k % len(style.palette)]
        canvas.polyline(curve.xs, curve.ys, color, label=curve.label)
    canvas.axes(x_axis.name, y_axis.name)
    present = [label for label in RegionLabel if label in region_map.present()]
    canvas.legend([(str(label), REGION_COLORS[label]) for label in present])
    return canvas.root


def _profile(plot: ProfilePlot, style: PlotStyle) -> etree._Element:
    canvas = Canvas(
        _bounds([c.xs for c in plot.curves]),
        _bounds([c.ys for c in plot.curves]),
        style,
        plot.title,
    )
    canvas.axes(plot.x_label, plot.y_label)
    entries = []
    for k, curve in enumerate(plot.curves):
        color = style.palette[k % len(style.palette)]
        canvas.polyline(curve.xs, curve.ys, color, label=curve.label)
        entries.append((curve.label, color))
    canvas.legend(entries)
    return canvas.root


RENDERERS = {
    TimeSeriesPlot: _time_series,
    PhasePortraitPlot: _phase_portrait,
    RegionMapPlot: _region_map,
    ProfilePlot: _profile,
}


def render_svg(artifact: object, style: PlotStyle | None = None) -> etree._Element:
    if (renderer := RENDERERS.get(type(artifact))) is None:
        raise UnsupportedArtifactError(f"Cannot plot artifact of type {type(artifact).__name__}")
    return renderer(artifact, style or PlotStyle())


def emit_plot(
    artifact: object, store: ArtifactStore, filename: str, style: PlotStyle | None = None
) -> Path:
    return store.write_svg(filename, render_svg(artifact, style))


def _axis_from_values(name: str, values: np.ndarray) -> Axis:
    unique = np.unique(values)
    return Axis(name=name, low=float(unique[0]), high=float(unique[-1]), size=len(unique))


def artifact_from_csv(path: Path) -> object:
    """Plot object for a CSV written by this tool, chosen by its header"""
    table = read_csv(path)
    header = table.header
    title = Path(path).stem

    if header == ["t", "mean_e", "mean_i"]:
        return TimeSeriesPlot(
            title,
            table.column("t"),
            {"mean_e": table.column("mean_e"), "mean_i": table.column("mean_i")},
        )
    if header[:3] == ["t", "s", "sigma"]:
        series = {"s": table.column("s"), "sigma": table.column("sigma")}
        return TimeSeriesPlot(title, table.column("t"), series)
    if len(header) == 3 and header[2] == "label":
        xs, ys = table.column(header[0]), table.column(header[1])
        x_axis, y_axis = _axis_from_values(header[0], xs), _axis_from_values(header[1], ys)
        labels_text = table.text_column("label")
        lookup = {(x, y): RegionLabel(label) for x, y, label in zip(xs, ys, labels_text)}
        labels = tuple(
            tuple(lookup[(x, y)] for x in np.unique(xs)) for y in np.unique(ys)
        )
        variant = SystemVariant.FULL if "h_e" in header else SystemVariant.REDUCED
        region_map = BifurcationMap(x_axis, y_axis, labels, fixed={}, variant=variant)
        return RegionMapPlot(title, region_map)
    if header[:3] == ["w_ie", "w_ee", "c_ee"]:
        w_ie, w_ee, c_ee = table.column("w_ie"), table.column("w_ee"), table.column("c_ee")
        curves = tuple(
            Curve(f"w_ie={line:g}", w_ee[w_ie == line], c_ee[w_ie == line])
            for line in np.unique(w_ie)
        )
        return ProfilePlot(title, curves)
    if header[:3] == ["s", "sigma", "stability"]:
        s, sigma = table.column("s"), table.column("sigma")
        low = 0.0 if (s.size and s.min() >= 0 and sigma.min() >= 0) else -0.5
        points = tuple(zip(s.tolist(), sigma.tolist()))
        return PhasePortraitPlot(title, (low, low + 1.0), points=points)

    raise UnsupportedArtifactError(f"Unrecognized CSV header in {path}: {','.join(header)}")


def plot_csv(path: Path, store: ArtifactStore, style: PlotStyle | None = None) -> Path:
    return emit_plot(artifact_from_csv(path), store, f"{Path(path).stem}.svg", style)
