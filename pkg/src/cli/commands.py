import argparse
import logging.config
from pathlib import Path
from typing import Any, Sequence

from src.config.app import WORKERS, FigureId, ScenarioKind, SystemVariant
from src.config.logging import LOGGING_CONFIG
from src.exceptions import (
    CheckFailedError,
    ConfigError,
    NonFiniteError,
    ScanQualityError,
    SimulationError,
    UnsupportedArtifactError,
)
from src.harness.figures import reproduce_figure
from src.harness.plotting import plot_csv
from src.harness.runner import run_scenario
from src.harness.scenario import ScenarioConfig, load_scenario, parse_scenario
from src.storage.artifacts import ArtifactStore

logger = logging.getLogger("cli.commands")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--set",
        dest="overrides",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        help="override a scenario key, e.g. --set regulation.eps_ee=0.02 (wins over other flags)",
    )
    parser.add_argument("--seed", type=int, help="seed of stochastic runs")
    parser.add_argument("--output-dir", type=str, help="root directory of the run directories")
    parser.add_argument("--dt", type=float, help="integration step")
    parser.add_argument("--t-end", type=float, help="simulated time")
    parser.add_argument("--workers", type=int, default=WORKERS, help="process pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Mean-field and Glauber simulation of an E/I network under covariance "
        "plasticity"
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    for kind in ScenarioKind:
        verb = verbs.add_parser(kind.value, help=f"run a {kind.value} scenario")
        verb.add_argument("config", nargs="?", type=Path, help="scenario file (YAML)")
        _add_run_flags(verb)

    run = verbs.add_parser("run", help="run a scenario file of any kind")
    run.add_argument("config", type=Path)
    _add_run_flags(run)

    figure = verbs.add_parser("figure", help="reproduce a built-in figure")
    figure.add_argument("figure_id", choices=[str(f) for f in FigureId])
    figure.add_argument("--check", action="store_true", help="evaluate the acceptance checks")
    _add_run_flags(figure)

    plot = verbs.add_parser("plot", help="render a CSV artifact to SVG")
    plot.add_argument("csv", type=Path)
    plot.add_argument("--output-dir", type=str, help="directory of the SVG (default: next to CSV)")
    return parser


def cli_flags(args: argparse.Namespace) -> dict[str, Any]:
    """Dedicated flags as scenario key paths; precedence below --set, above the file"""
    return {
        "seed": args.seed,
        "output_dir": args.output_dir,
        "integrator.dt": args.dt,
        "integrator.t_end": args.t_end,
    }


def scenario_from_args(args: argparse.Namespace) -> ScenarioConfig:
    flags = cli_flags(args)
    if args.verb != "run":
        flags["kind"] = args.verb
    if args.config is not None:
        return load_scenario(args.config, args.overrides, flags)

    # built-in defaults; the Glauber network only exists with thresholds
    if args.verb == ScenarioKind.SIMULATE:
        flags["variant"] = SystemVariant.FULL.value
    return parse_scenario("", args.overrides, flags)


def execute(args: argparse.Namespace) -> None:
    match args.verb:
        case "figure":
            result = reproduce_figure(
                args.figure_id,
                root=Path(args.output_dir) if args.output_dir else None,
                workers=args.workers,
                check=args.check,
                overrides=args.overrides,
                flags={key: value for key, value in cli_flags(args).items() if key != "output_dir"},
            )
            print(result.store.run_dir)
        case "plot":
            store = ArtifactStore(Path(args.output_dir) if args.output_dir else args.csv.parent)
            print(plot_csv(args.csv, store))
        case _:
            result = run_scenario(scenario_from_args(args), workers=args.workers)
            print(result.store.run_dir)


def main(argv: Sequence[str] | None = None) -> int:
    logging.config.dictConfig(LOGGING_CONFIG)
    logging.captureWarnings(capture=True)

    args = build_parser().parse_args(argv)
    try:
        execute(args)
    except (ConfigError, UnsupportedArtifactError) as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_CONFIG
    except CheckFailedError as exc:
        logger.error("%s:\n%s", exc, "\n".join(exc.failures))
        return EXIT_CHECK
    except (NonFiniteError, ScanQualityError) as exc:
        logger.error("Numerical failure (partial artifacts kept): %s", exc)
        return EXIT_NUMERICAL
    except SimulationError as exc:
        logger.error("Run failed: %s", exc)
        return EXIT_NUMERICAL

    return EXIT_OK
