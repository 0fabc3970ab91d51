"""Command-line entry point: ``python -m verhulst`` or ``verhulst_fi.py``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, TextIO

from .config.defaults import COMMAND_RUNNERS, DEFAULT_PRESETS
from .config.loader import load_config
from .core.errors import ArtifactError, ConfigError, DivergenceError, SchemaError
from .core.progress import (
    ARTIFACT_WRITTEN,
    SCENARIO_DIVERGED,
    SCENARIO_FINISHED,
    SCENARIO_STARTED,
    ProgressBus,
)
from .experiments.presets import run_config

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s: %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML scenario document")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--svg", dest="emit_svg", action="store_true", default=None, help="render an SVG next to every CSV")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    common.add_argument("--dt", type=float, help="integration step")
    common.add_argument("--bins", type=int, help="density bin count")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="verhulst",
        description="Modulated logistic growth: trajectories, occupancy densities and Fisher Information",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "trajectory, density and FI series for every configured scenario",
        "density": "time-occupancy densities",
        "fisher": "Fisher Information against the observation horizon",
        "sweep": "asymptotic Fisher Information across omega",
        "resilience": "percent change of the time mean under additive forcing",
    }
    for name in COMMAND_RUNNERS:
        commands.add_parser(name, parents=[common], help=helps.get(name))
    figure = commands.add_parser("figure", parents=[common], help="regenerate a figure or table preset")
    figure.add_argument("preset", choices=sorted(DEFAULT_PRESETS))
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def progress_logger(bus: ProgressBus) -> ProgressBus:
    """Subscribe console logging to the runner events published on *bus*."""

    bus.subscribe(SCENARIO_STARTED, lambda payload: logger.debug("Started %s", payload["name"]))
    bus.subscribe(SCENARIO_FINISHED, lambda payload: logger.info("Finished %s", payload["name"]))
    bus.subscribe(
        SCENARIO_DIVERGED,
        lambda payload: logger.warning(
            "%s diverged at t=%s", payload["name"], payload.get("divergence_time")
        ),
    )
    bus.subscribe(ARTIFACT_WRITTEN, lambda payload: logger.debug("Wrote %s", payload["path"]))
    return bus


def error_record(kind: str, message: str, field: Optional[str] = None) -> Dict[str, Any]:
    return {"error": kind, "field": field, "message": message}


def _report(record: Dict[str, Any], stream: TextIO) -> None:
    stream.write(json.dumps(record, sort_keys=True) + "\n")


def main(argv: Optional[Sequence[str]] = None, *, stderr: Optional[TextIO] = None) -> int:
    """Run the CLI and return its exit status."""

    stream = stderr if stderr is not None else sys.stderr
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    preset = args.preset if args.command == "figure" else None
    command = None if args.command == "figure" else args.command
    flags = {"output_dir": args.output_dir, "emit_svg": args.emit_svg, "dt": args.dt, "bins": args.bins}
    try:
        config = load_config(args.config, preset=preset, overrides=args.overrides, flags=flags)
        bus = progress_logger(ProgressBus())
        artifacts = run_config(config, command=command, bus=bus)
    except ConfigError as exc:
        _report(error_record("config", exc.message, exc.field), stream)
        return EXIT_CONFIG
    except DivergenceError as exc:
        _report(error_record("divergence", str(exc)), stream)
        return EXIT_DIVERGED
    except (ArtifactError, SchemaError, OSError) as exc:
        _report(error_record("io", str(exc)), stream)
        return EXIT_IO
    except ValueError as exc:
        _report(error_record("validation", str(exc)), stream)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover
        logger.exception("Unexpected failure")
        _report(error_record("internal", str(exc)), stream)
        return EXIT_FAILURE
    logger.info("%s; artifacts in %s", bus.summary(), artifacts.directory)
    return EXIT_OK


__all__ = ["build_parser", "configure_logging", "error_record", "main", "progress_logger"]
