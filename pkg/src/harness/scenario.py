"""
Scenario files: YAML documents parsed into a frozen `ScenarioConfig` tree.

The schema is strict: an unknown key, a wrong type or a value outside the domain of the module
that will consume it is a ConfigError naming the key path and, when the value came from a file,
its line.
"""

import dataclasses
import enum
import logging
import types
import typing
from pathlib import Path
from typing import Any, Union

import yaml

from src.analysis.profiles import ProfileLine
from src.analysis.region_map import MIN_GRID, Axis, ScanOptions
from src.config.app import DEFAULT_BETA, DEFAULT_DT, ScenarioKind, SystemVariant
from src.dynamics.models import FiringThresholds, SynapticWeights, SystemParams
from src.evolution.regulation import ExtendedState, RegulationConfig
from src.exceptions import ConfigError, SimulationError
from src.glauber.network import GlauberConfig
from src.utils import apply_overrides, set_path

logger = logging.getLogger(__name__)

LineMap = dict[str, int]


@dataclasses.dataclass(frozen=True)
class WeightsSection:
    w_ee: float = 12.0
    w_ei: float = 10.0
    w_ie: float = 8.0
    w_ii: float = 2.0


@dataclasses.dataclass(frozen=True)
class ThresholdsSection:
    h_e: float = 1.0
    h_i: float = 3.0


@dataclasses.dataclass(frozen=True)
class RegulationSection:
    rho: float = 0.1
    eps_ee: float = 0.01
    theta_ee: float = 0.01
    eps_ie: float = -0.01
    theta_ie: float = 0.01
    eps_he: float = 0.0
    theta_he: float = 0.5
    eps_hi: float = 0.0
    theta_hi: float = 0.5
    regulate: tuple[str, ...] = ()


@dataclasses.dataclass(frozen=True)
class IntegratorSection:
    dt: float = DEFAULT_DT
    t_end: float = 100.0
    sample_every: float = 0.1
    t_transient: float = 500.0
    t_measure: float = 500.0


@dataclasses.dataclass(frozen=True)
class InitialSection:
    points: tuple[tuple[float, float], ...] = ((0.1, 0.05),)


@dataclasses.dataclass(frozen=True)
class GlauberSection:
    n: int = 70
    sample_every: float = 0.05
    initial_e: float | None = None
    initial_i: float | None = None


@dataclasses.dataclass(frozen=True)
class AxisSection:
    name: str
    low: float
    high: float
    size: int

    def axis(self) -> Axis:
        return Axis(name=self.name, low=self.low, high=self.high, size=self.size)


@dataclasses.dataclass(frozen=True)
class ScanSection:
    x: AxisSection = AxisSection("w_ee", 0.0, 20.0, 40)
    y: AxisSection = AxisSection("w_ie", 0.0, 20.0, 40)
    dense: bool = False
    max_unclassified: float = 0.05


@dataclasses.dataclass(frozen=True)
class ProfileSection:
    w_ie: tuple[float, ...] = (8.0,)
    w_ee_low: float = 5.5
    w_ee_high: float = 15.0
    w_ee_size: int = 39


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    kind: ScenarioKind
    name: str = "scenario"
    variant: SystemVariant = SystemVariant.REDUCED
    beta: float = DEFAULT_BETA
    weights: WeightsSection = WeightsSection()
    thresholds: ThresholdsSection | None = None
    regulation: RegulationSection = RegulationSection()
    integrator: IntegratorSection = IntegratorSection()
    initial: InitialSection = InitialSection()
    glauber: GlauberSection = GlauberSection()
    scan: ScanSection = ScanSection()
    profile: ProfileSection = ProfileSection()
    seed: int = 0
    output_dir: str | None = None

    def system_params(self) -> SystemParams:
        weights = SynapticWeights(**dataclasses.asdict(self.weights))
        if self.variant is SystemVariant.FULL:
            thresholds = self.thresholds or ThresholdsSection()
            firing = FiringThresholds(thresholds.h_e, thresholds.h_i)
            return SystemParams.full(weights, firing, self.beta)
        return SystemParams.reduced(weights, self.beta)

    def regulation_config(self) -> RegulationConfig:
        rates = dataclasses.asdict(self.regulation)
        regulated = rates.pop("regulate")
        return RegulationConfig(
            w_ei=self.weights.w_ei,
            w_ii=self.weights.w_ii,
            variant=self.variant,
            beta=self.beta,
            **rates,
            **{f"regulate_{name}": True for name in regulated},
        )

    def initial_states(self) -> list[ExtendedState]:
        params = self.system_params()
        return [
            ExtendedState.initial(
                s, sigma, self.weights.w_ee, self.weights.w_ie, h_e=params.h_e, h_i=params.h_i
            )
            for s, sigma in self.initial.points
        ]

    def glauber_config(self) -> GlauberConfig:
        return GlauberConfig(
            n=self.glauber.n,
            params=self.system_params(),
            seed=self.seed,
            t_end=self.integrator.t_end,
            sample_every=self.glauber.sample_every,
            initial_e=self.glauber.initial_e,
            initial_i=self.glauber.initial_i,
        )

    def scan_axes(self) -> tuple[Axis, Axis]:
        return self.scan.x.axis(), self.scan.y.axis()

    def scan_options(self) -> ScanOptions:
        return ScanOptions(
            t_transient=self.integrator.t_transient,
            t_measure=self.integrator.t_measure,
            dense=self.scan.dense,
            dt=self.integrator.dt,
        )

    def profile_lines(self) -> list[ProfileLine]:
        section = self.profile
        step = (section.w_ee_high - section.w_ee_low) / max(1, section.w_ee_size - 1)
        w_ee = tuple(section.w_ee_low + k * step for k in range(section.w_ee_size))
        return [
            ProfileLine(
                w_ie=w_ie,
                w_ee=w_ee,
                w_ei=self.weights.w_ei,
                w_ii=self.weights.w_ii,
                rho=self.regulation.rho,
            )
            for w_ie in section.w_ie
        ]

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return _plain(self)


# key path of every value the checks below can blame, with the builder that exercises it
VALIDATORS = {
    ScenarioKind.SIMULATE: ("glauber", ScenarioConfig.glauber_config),
    ScenarioKind.REGULATE: ("regulation", ScenarioConfig.regulation_config),
}
REGULATED_NAMES = ("w_ee", "w_ie", "h_e", "h_i")
POSITIVE_INTEGRATOR_KEYS = ("dt", "t_end", "sample_every", "t_measure")


def _plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value):
        return {
            field.name: _plain(getattr(value, field.name)) for field in dataclasses.fields(value)
        }
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return [_plain(item) for item in value]
    return value


def line_map(text: str) -> LineMap:
    """Dotted key path -> 1-based line of its value, from the YAML node tree"""
    lines: LineMap = {}

    def walk(node: yaml.Node, path: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                child = f"{path}.{key_node.value}" if path else str(key_node.value)
                lines[child] = key_node.start_mark.line + 1
                walk(value_node, child)

    if (root := yaml.compose(text)) is not None:
        walk(root, "")
    return lines


def _optional_inner(hint: Any) -> tuple[Any, bool]:
    if typing.get_origin(hint) in (Union, types.UnionType):
        args = [arg for arg in typing.get_args(hint) if arg is not type(None)]
        return args[0], len(args) < len(typing.get_args(hint))
    return hint, False


def _convert(hint: Any, value: Any, path: str, lines: LineMap) -> Any:
    def fail(message: str) -> ConfigError:
        return ConfigError(message, key=path, line=lines.get(path))

    hint, optional = _optional_inner(hint)
    if value is None:
        if optional:
            return None
        raise fail("Value is required")

    if dataclasses.is_dataclass(hint):
        if not isinstance(value, dict):
            raise fail(f"Expected a mapping, got {type(value).__name__}")
        return _build(hint, value, path, lines)

    if typing.get_origin(hint) is tuple:
        if not isinstance(value, (list, tuple)):
            raise fail(f"Expected a list, got {type(value).__name__}")
        args = typing.get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_convert(args[0], item, path, lines) for item in value)
        if len(value) != len(args):
            raise fail(f"Expected {len(args)} items, got {len(value)}")
        return tuple(_convert(arg, item, path, lines) for arg, item in zip(args, value))

    if isinstance(hint, type) and issubclass(hint, enum.Enum):
        try:
            return hint(value)
        except ValueError:
            raise fail(f"Expected one of {[member.value for member in hint]}, got {value!r}")

    if hint is bool:
        if not isinstance(value, bool):
            raise fail(f"Expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise fail(f"Expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise fail(f"Expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise fail(f"Expected a string, got {value!r}")
        return value

    raise fail(f"Unsupported schema type {hint!r}")


def _build(cls: type, data: dict[str, Any], prefix: str, lines: LineMap) -> Any:
    hints = typing.get_type_hints(cls)
    names = {field.name for field in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            path = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(
                f"Unknown key (expected one of {sorted(names)})", key=path, line=lines.get(path)
            )

    values = {}
    for field in dataclasses.fields(cls):
        path = f"{prefix}.{field.name}" if prefix else field.name
        if field.name in data:
            values[field.name] = _convert(hints[field.name], data[field.name], path, lines)
        elif field.default is dataclasses.MISSING and field.default_factory is dataclasses.MISSING:
            raise ConfigError("Missing required key", key=path, line=lines.get(prefix))
    return cls(**values)


def validate(config: ScenarioConfig, lines: LineMap | None = None) -> ScenarioConfig:
    """Builds every domain object the run will need, so bad values fail before any work starts"""
    lines = lines or {}

    def fail(message: str, key: str) -> ConfigError:
        return ConfigError(message, key=key, line=lines.get(key))

    for key in POSITIVE_INTEGRATOR_KEYS:
        if not getattr(config.integrator, key) > 0:
            raise fail("Must be positive", f"integrator.{key}")
    if config.integrator.t_transient < 0:
        raise fail("Must be >= 0", "integrator.t_transient")
    for name in config.regulation.regulate:
        if name not in REGULATED_NAMES:
            message = f"Unknown rule {name!r}, expected one of {REGULATED_NAMES}"
            raise fail(message, "regulation.regulate")
    for s, sigma in config.initial.points:
        low, high = (0.0, 1.0) if config.variant is SystemVariant.FULL else (-0.5, 0.5)
        if not (low <= s <= high and low <= sigma <= high):
            message = f"Initial point ({s}, {sigma}) outside the box [{low}, {high}]"
            raise fail(message, "initial.points")
    if config.variant is SystemVariant.REDUCED and config.thresholds is not None:
        raise fail("The reduced system has no thresholds", "thresholds")

    try:
        config.system_params()
    except SimulationError as exc:
        raise fail(str(exc), "weights")

    if (validator := VALIDATORS.get(config.kind)) is not None:
        key, build = validator
        try:
            build(config)
        except SimulationError as exc:
            # blame the field the message starts with when there is one
            section = dataclasses.fields(getattr(config, key))
            names = [field.name for field in section if str(exc).startswith(field.name)]
            raise fail(str(exc), f"{key}.{names[0]}" if names else key)
    if config.kind is ScenarioKind.SCAN:
        for name in ("x", "y"):
            if getattr(config.scan, name).size < MIN_GRID:
                raise fail(f"Scan axes need at least {MIN_GRID} points", f"scan.{name}.size")
    return config


def parse_scenario(
    text: str,
    overrides: list[str] | None = None,
    flags: dict[str, Any] | None = None,
) -> ScenarioConfig:
    """
    Parses and validates a scenario document

    :param text: YAML text
    :param overrides: `--set key.path=value` strings, they win over everything else
    :param flags: dedicated CLI flags as {key path: value}, ignored when the value is None
    :return <ScenarioConfig> validated configuration
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Scenario is not valid YAML: {exc}")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("Scenario must be a mapping at the top level")

    for key, value in (flags or {}).items():
        if value is not None:
            set_path(data, tuple(key.split(".")), value)
    data = apply_overrides(data, overrides or [])

    lines = line_map(text)
    return validate(_build(ScenarioConfig, data, "", lines), lines)


def load_scenario(
    path: Path,
    overrides: list[str] | None = None,
    flags: dict[str, Any] | None = None,
) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read scenario file {path}: {exc}")

    config = parse_scenario(text, overrides, flags)
    logger.info(
        "Scenario %(name)s loaded from %(path)s (%(kind)s)",
        {"name": config.name, "path": path, "kind": config.kind},
    )
    return config


def dump_scenario(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
