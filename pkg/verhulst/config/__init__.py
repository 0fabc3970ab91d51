"""Scenario configuration: defaults, presets and the layered loader."""

from .defaults import COMMAND_RUNNERS, DEFAULT_PRESETS, DEFAULT_SCENARIO, clone_defaults
from .loader import (
    Forcing,
    Scenario,
    ScenarioConfig,
    load_config,
    parse_config,
    resolve,
    serialize_config,
)

__all__ = [
    "COMMAND_RUNNERS",
    "DEFAULT_PRESETS",
    "DEFAULT_SCENARIO",
    "Forcing",
    "Scenario",
    "ScenarioConfig",
    "clone_defaults",
    "load_config",
    "parse_config",
    "resolve",
    "serialize_config",
]
