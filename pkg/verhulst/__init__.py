"""Logistic growth under oscillatory feedback modulation, with Fisher Information analysis."""

from .config.loader import load_config
from .core.model import ModelSpec, Variant

__version__ = "1.0.0"

__all__ = ["ModelSpec", "Variant", "__version__", "load_config"]
