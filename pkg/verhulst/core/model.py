"""Logistic model variants under sinusoidal feedback modulation.

The population ``x`` obeys one of three equations, selected by
:class:`Variant`:

* ``correlated`` - ``dx/dt = N(t) x (1 - x/K) + F(t)``
* ``positive``   - ``dx/dt = N(t) x - C x^2/K + F(t)``
* ``negative``   - ``dx/dt = C x - N(t) x^2/K + F(t)``

with ``N(t) = B + N0 sin(omega t)`` and the additive forcing
``F(t) = B1 sin(omega1 t)``. Every evaluator accepts floats or numpy arrays.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DivergenceError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
DriftFunction = Callable[[float, float], float]


class Variant(str, Enum):
    """Which feedback term carries the modulation ``N(t)``."""

    CORRELATED = "correlated"
    POSITIVE_ONLY = "positive"
    NEGATIVE_ONLY = "negative"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        aliases = {
            "correlated": cls.CORRELATED,
            "positive": cls.POSITIVE_ONLY,
            "positiveonly": cls.POSITIVE_ONLY,
            "case1": cls.POSITIVE_ONLY,
            "negative": cls.NEGATIVE_ONLY,
            "negativeonly": cls.NEGATIVE_ONLY,
            "case2": cls.NEGATIVE_ONLY,
        }
        try:
            return aliases[text.replace("_", "").replace("-", "")]
        except KeyError:
            raise ConfigError("variant", f"unknown variant {value!r}") from None


@dataclass(frozen=True)
class ModelSpec:
    """All scalar parameters of one model instance.

    ``C`` is the constant coefficient of the unmodulated feedback term and is
    ignored by the correlated variant. ``B1 = 0`` means unforced.
    """

    variant: Variant = Variant.CORRELATED
    B: float = 0.0
    N0: float = 5.0
    omega: float = 1.0
    K: float = 10.0
    C: float = 1.0
    B1: float = 0.0
    omega1: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for name in ("B", "N0", "omega", "K", "C", "B1", "omega1"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigError(name, f"expected a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise ConfigError(name, "must be finite")
            object.__setattr__(self, name, value)
        if self.K <= 0:
            raise ConfigError("K", "carrying capacity must be > 0")
        if self.omega <= 0:
            raise ConfigError("omega", "modulation frequency must be > 0")
        if self.N0 < 0:
            raise ConfigError("N0", "modulation amplitude must be >= 0")
        if self.B1 < 0:
            raise ConfigError("B1", "forcing amplitude must be >= 0")
        if self.B1 > 0 and self.omega1 <= 0:
            raise ConfigError("omega1", "forcing frequency must be > 0 when B1 > 0")

    # ------------------------------------------------------------------ queries
    @property
    def is_forced(self) -> bool:
        return self.B1 != 0.0

    @property
    def has_closed_form(self) -> bool:
        """True when the correlated closed-form solution applies."""

        return self.variant is Variant.CORRELATED and not self.is_forced

    @property
    def has_negative_closed_form(self) -> bool:
        return self.variant is Variant.NEGATIVE_ONLY and not self.is_forced

    @property
    def fastest_frequency(self) -> float:
        if self.is_forced:
            return max(self.omega, self.omega1)
        return self.omega

    def replace(self, **changes: Any) -> "ModelSpec":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["variant"] = self.variant.value
        return payload


# ---------------------------------------------------------------------- drift
def growth_rate(spec: ModelSpec, t: ArrayLike) -> ArrayLike:
    """Return the modulated rate ``B + N0 sin(omega t)``."""

    return spec.B + spec.N0 * np.sin(spec.omega * t)


def _growth_rate_rate(spec: ModelSpec, t: ArrayLike) -> ArrayLike:
    return spec.N0 * spec.omega * np.cos(spec.omega * t)


def _forcing(spec: ModelSpec, t: ArrayLike) -> ArrayLike:
    if not spec.is_forced:
        return 0.0
    return spec.B1 * np.sin(spec.omega1 * t)


def _forcing_rate(spec: ModelSpec, t: ArrayLike) -> ArrayLike:
    if not spec.is_forced:
        return 0.0
    return spec.B1 * spec.omega1 * np.cos(spec.omega1 * t)


def drift(spec: ModelSpec, x: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Return ``u = dx/dt`` for the variant selected by ``spec``."""

    n = growth_rate(spec, t)
    K = spec.K
    if spec.variant is Variant.CORRELATED:
        u = n * x * (1.0 - x / K)
    elif spec.variant is Variant.POSITIVE_ONLY:
        u = n * x - spec.C * x * x / K
    else:
        u = spec.C * x - n * x * x / K
    return u + _forcing(spec, t)


def drift_time_derivative(spec: ModelSpec, x: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Return ``du/dt = df/dt + f df/dx`` along a solution, evaluated analytically."""

    n = growth_rate(spec, t)
    dn = _growth_rate_rate(spec, t)
    K = spec.K
    f = drift(spec, x, t)
    if spec.variant is Variant.CORRELATED:
        partial_t = dn * x * (1.0 - x / K)
        partial_x = n * (1.0 - 2.0 * x / K)
    elif spec.variant is Variant.POSITIVE_ONLY:
        partial_t = dn * x
        partial_x = n - 2.0 * spec.C * x / K
    else:
        partial_t = -dn * x * x / K
        partial_x = spec.C - 2.0 * n * x / K
    return partial_t + _forcing_rate(spec, t) + f * partial_x


def drift_function(spec: ModelSpec) -> DriftFunction:
    """Return a scalar ``f(x, t)`` closure built on :mod:`math` for tight loops."""

    B, N0, w, K, C = spec.B, spec.N0, spec.omega, spec.K, spec.C
    B1, w1 = spec.B1, spec.omega1
    sin = math.sin
    forced = spec.is_forced

    if spec.variant is Variant.CORRELATED:
        if forced:
            def f(x: float, t: float) -> float:
                return (B + N0 * sin(w * t)) * x * (1.0 - x / K) + B1 * sin(w1 * t)
        else:
            def f(x: float, t: float) -> float:
                return (B + N0 * sin(w * t)) * x * (1.0 - x / K)
    elif spec.variant is Variant.POSITIVE_ONLY:
        def f(x: float, t: float) -> float:
            value = (B + N0 * sin(w * t)) * x - C * x * x / K
            return value + B1 * sin(w1 * t) if forced else value
    else:
        def f(x: float, t: float) -> float:
            value = C * x - (B + N0 * sin(w * t)) * x * x / K
            return value + B1 * sin(w1 * t) if forced else value
    return f


# ---------------------------------------------------------------------- closed forms
def _phase(spec: ModelSpec, t: ArrayLike) -> ArrayLike:
    return spec.B * t + (spec.N0 / spec.omega) * (1.0 - np.cos(spec.omega * t))


def exact_correlated(spec: ModelSpec, x0: float, t: ArrayLike) -> ArrayLike:
    """Closed-form solution of the unforced correlated model.

    Written as ``K x0 / (x0 + (K - x0) exp(-phi))`` which is algebraically the
    textbook form and stays finite when ``phi`` is large.
    """

    if spec.variant is not Variant.CORRELATED:
        raise ValueError("exact_correlated requires the correlated variant")
    if spec.is_forced:
        raise ValueError("closed form does not apply to a forced model (B1 != 0)")
    phi = _phase(spec, np.asarray(t, dtype=float))
    with np.errstate(over="ignore"):
        value = spec.K * x0 / (x0 + (spec.K - x0) * np.exp(-phi))
    return float(value) if np.ndim(value) == 0 else value


def _negative_terms(spec: ModelSpec, x0: float, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Numerator and denominator of the Case-2 closed form.

    For ``C > 0`` both are divided by ``exp(C t)`` so long horizons stay finite.
    """

    C, w, K, N0, B = spec.C, spec.omega, spec.K, spec.N0, spec.B
    a = C * C + w * w
    c = C * np.sin(w * t) - w * np.cos(w * t)
    if C > 0:
        decay = np.exp(-C * t)
        numerator = np.full_like(decay, K * a * C * x0)
        denominator = K * C * a * decay + N0 * C * x0 * c + N0 * C * w * x0 * decay + B * x0 * a * (1.0 - decay)
    else:
        b = np.exp(C * t)
        numerator = K * a * b * C * x0
        denominator = K * C * a + N0 * C * b * x0 * c + N0 * C * w * x0 + B * x0 * a * (b - 1.0)
    return numerator, denominator


def negative_blowup_time(spec: ModelSpec, x0: float, t_max: float) -> Optional[float]:
    """First time in ``[0, t_max]`` at which the Case-2 denominator reaches zero."""

    if spec.C == 0.0:
        raise ValueError("the Case-2 closed form requires C != 0")
    if t_max <= 0:
        return None
    sign = math.copysign(1.0, spec.C)
    step = min(0.05, 2.0 * math.pi / (64.0 * spec.omega))
    n = max(2, int(math.ceil(t_max / step)) + 1)
    grid = np.linspace(0.0, t_max, n)
    values = _negative_terms(spec, x0, grid)[1] * sign
    bad = np.flatnonzero(~(values > 0.0))
    if bad.size == 0:
        return None
    i = int(bad[0])
    if i == 0:
        return 0.0
    lo, hi = float(grid[i - 1]), float(grid[i])
    root = brentq(lambda s: float(_negative_terms(spec, x0, s)[1]), lo, hi, xtol=1e-12)
    logger.debug("Case-2 denominator changes sign at t=%.6g", root)
    return float(root)


def exact_negative(spec: ModelSpec, x0: float, t: ArrayLike) -> ArrayLike:
    """Closed-form solution of the unforced negative-feedback model.

    Raises :class:`DivergenceError` (with ``time`` set to the first sign change
    of the denominator) when any requested time lies at or beyond blow-up.
    """

    if spec.variant is not Variant.NEGATIVE_ONLY:
        raise ValueError("exact_negative requires the negative-only variant")
    if spec.is_forced:
        raise ValueError("closed form does not apply to a forced model (B1 != 0)")
    if x0 <= 0:
        raise ValueError("exact_negative requires x0 > 0")
    times = np.asarray(t, dtype=float)
    t_max = float(np.max(times)) if times.size else 0.0
    blowup = negative_blowup_time(spec, x0, t_max)
    if blowup is not None:
        raise DivergenceError(f"solution blows up at t={blowup:.6g}", time=blowup)
    numerator, denominator = _negative_terms(spec, x0, times)
    value = numerator / denominator
    return float(value) if np.ndim(value) == 0 else value


def max_x_closed_form(spec: ModelSpec, x0: float) -> float:
    """Maximum over one period of the unforced correlated solution with ``B = 0``."""

    if not spec.has_closed_form or spec.B != 0.0:
        raise ValueError("max_x_closed_form requires the unforced correlated model with B = 0")
    if not 0.0 < x0 < spec.K:
        raise ValueError("max_x_closed_form requires 0 < x0 < K")
    inv_e = math.exp(-2.0 * spec.N0 / spec.omega)
    return spec.K * x0 / (x0 + (spec.K - x0) * inv_e)


def max_x_sampled(spec: ModelSpec, x0: float, samples: int = 20001) -> float:
    """Maximum of the closed form sampled densely over one period."""

    period = 2.0 * math.pi / spec.omega
    grid = np.linspace(0.0, period, samples)
    return float(np.max(exact_correlated(spec, x0, grid)))


__all__ = [
    "ModelSpec",
    "Variant",
    "drift",
    "drift_function",
    "drift_time_derivative",
    "exact_correlated",
    "exact_negative",
    "growth_rate",
    "max_x_closed_form",
    "max_x_sampled",
    "negative_blowup_time",
]
