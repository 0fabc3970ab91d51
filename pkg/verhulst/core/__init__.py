"""Model, integrator and shared plumbing for the verhulst packages."""

from .errors import ArtifactError, ConfigError, DivergenceError, SchemaError, VerhulstError
from .integrate import (
    Trajectory,
    convergence_check,
    default_dt,
    integrate,
    sample_closed_form,
    solve,
    stream,
)
from .model import ModelSpec, Variant
from .progress import ProgressBus

__all__ = [
    "ArtifactError",
    "ConfigError",
    "DivergenceError",
    "ModelSpec",
    "ProgressBus",
    "SchemaError",
    "Trajectory",
    "Variant",
    "VerhulstError",
    "convergence_check",
    "default_dt",
    "integrate",
    "sample_closed_form",
    "solve",
    "stream",
]
