"""Exception hierarchy shared by the verhulst packages."""

from __future__ import annotations

from typing import Optional


class VerhulstError(Exception):
    """Base class for every error raised on purpose by this package."""


class ConfigError(VerhulstError, ValueError):
    """A configuration or model parameter failed validation."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class DivergenceError(VerhulstError, ArithmeticError):
    """A solution left every finite bound at ``time``."""

    def __init__(self, message: str, *, time: Optional[float] = None) -> None:
        super().__init__(message)
        self.time = time


class SchemaError(VerhulstError, ValueError):
    """A CSV artifact does not have the columns a consumer expects."""


class ArtifactError(VerhulstError, OSError):
    """Writing or reading an artifact failed."""


__all__ = [
    "ArtifactError",
    "ConfigError",
    "DivergenceError",
    "SchemaError",
    "VerhulstError",
]
