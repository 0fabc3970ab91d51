"""Resolve presets and commands to runners and execute them into an artifact directory."""

from __future__ import annotations

import importlib
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Union

from ..config.defaults import COMMAND_RUNNERS, clone_defaults
from ..config.loader import ScenarioConfig, load_config
from ..core.errors import ConfigError, DivergenceError
from ..core.progress import NULL_BUS, ProgressBus
from ..ui.svg import write_svg
from .artifacts import ArtifactSet

logger = logging.getLogger(__name__)

Runner = Callable[[ScenarioConfig, ArtifactSet], None]


def _import_string(target: str) -> Any:
    """Import ``package.module`` or ``package.module:attribute``."""

    module_path, _, attribute = target.partition(":")
    module = importlib.import_module(module_path)
    if attribute:
        return getattr(module, attribute)
    return module


def runner_for(*, preset: Optional[str] = None, command: Optional[str] = None) -> Runner:
    if preset is not None:
        _, presets, _ = clone_defaults()
        if preset not in presets:
            raise ConfigError("preset", f"unknown preset {preset!r}; expected one of {sorted(presets)}")
        target = presets[preset]["runner"]
    elif command is not None:
        if command not in COMMAND_RUNNERS:
            raise ConfigError("command", f"unknown command {command!r}; expected one of {sorted(COMMAND_RUNNERS)}")
        target = COMMAND_RUNNERS[command]
    else:
        raise ConfigError("preset", "either a preset or a command is required")
    runner = _import_string(target)
    if not callable(runner):
        raise TypeError(f"runner target '{target}' is not callable")
    return runner


def _requires_bounded(preset: Optional[str]) -> bool:
    if preset is None:
        return False
    _, presets, _ = clone_defaults()
    return bool(presets[preset].get("require_bounded", False))


def run_config(
    config: ScenarioConfig,
    *,
    command: Optional[str] = None,
    bus: ProgressBus = NULL_BUS,
) -> ArtifactSet:
    """
    Run *config* (its preset, or *command* when no preset is set) and write the manifest.

    Artifacts land in ``<output_dir>/<preset or command>``. When the preset
    requires bounded solutions and any scenario diverged, the manifest is
    still written and :class:`DivergenceError` is raised afterwards.

    Parameters:
        config (ScenarioConfig): Resolved configuration, usually from :func:`load_config`.
        command (Optional[str]): CLI command naming the runner when ``config.preset`` is unset.
        bus (ProgressBus): Receives scenario and artifact events; the default drops them.

    Returns:
        ArtifactSet: Every file written, with its checksum and the per-scenario records.

    Raises:
        ConfigError: If neither a known preset nor a known command names a runner.
        DivergenceError: If a bounded preset produced a diverged scenario.
    """

    name = config.preset or command
    runner = runner_for(preset=config.preset, command=None if config.preset else command)
    artifacts = ArtifactSet(Path(config.output_dir) / str(name), bus=bus)
    logger.info("Running %s into %s", name, artifacts.directory)
    runner(config, artifacts)

    if config.emit_svg:
        for path in [path for path in artifacts.files if path.suffix == ".csv"]:
            artifacts.add(write_svg(path))

    bounded = _requires_bounded(config.preset)
    extra = {
        "preset": config.preset,
        "command": None if config.preset else command,
        "runner": f"{runner.__module__}:{runner.__name__}",
        "require_bounded": bounded,
    }
    artifacts.write_manifest(config.to_manifest(), extra=extra)
    logger.info("Wrote %d artifacts for %s", len(artifacts.files), name)

    diverged = artifacts.diverged
    if diverged:
        names = ", ".join(record["name"] for record in diverged)
        if bounded:
            first = diverged[0].get("divergence_time")
            raise DivergenceError(f"{name}: diverged scenarios in a bounded preset: {names}", time=first)
        logger.warning("Diverged scenarios: %s", names)
    return artifacts


def run_figure(
    preset: str,
    overrides: Iterable[str] = (),
    *,
    output_dir: Optional[Union[str, Path]] = None,
    bus: ProgressBus = NULL_BUS,
) -> ArtifactSet:
    """Regenerate one figure or table preset with optional ``key=value`` overrides."""

    flags = {"output_dir": str(output_dir)} if output_dir is not None else None
    config = load_config(preset=preset, overrides=overrides, flags=flags)
    return run_config(config, bus=bus)


__all__ = ["Runner", "run_config", "run_figure", "runner_for"]
