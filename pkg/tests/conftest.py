from __future__ import annotations

import pytest

from verhulst.config.loader import OUTPUT_ENV, SETTINGS_ENV
from verhulst.core.model import ModelSpec, Variant


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch):
    monkeypatch.delenv(SETTINGS_ENV, raising=False)
    monkeypatch.delenv(OUTPUT_ENV, raising=False)


@pytest.fixture
def correlated() -> ModelSpec:
    """Baseline correlated model: B = 0, N0 = 5, omega = 1, K = 10."""

    return ModelSpec(Variant.CORRELATED, B=0.0, N0=5.0, omega=1.0, K=10.0)


@pytest.fixture
def case2() -> ModelSpec:
    return ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, N0=1.0, omega=1.0, K=10.0, C=1.0)
