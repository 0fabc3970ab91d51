"""Scenario runners, figure presets and artifact bookkeeping."""

from .artifacts import MANIFEST_NAME, ArtifactSet
from .presets import run_config, run_figure, runner_for
from .runner import (
    Label,
    MaxXPoint,
    ResilienceEntry,
    ResilienceReport,
    label_for,
    max_x_sweep,
    mean_value,
    percent_change,
    resilience_study,
)

__all__ = [
    "ArtifactSet",
    "Label",
    "MANIFEST_NAME",
    "MaxXPoint",
    "ResilienceEntry",
    "ResilienceReport",
    "label_for",
    "max_x_sweep",
    "mean_value",
    "percent_change",
    "resilience_study",
    "run_config",
    "run_figure",
    "runner_for",
]
