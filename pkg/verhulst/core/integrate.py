"""Fixed-step trajectories on a uniform time grid.

Every sampler here returns the same :class:`Trajectory` shape: the grid is
``t_i = i * dt`` for ``i = 0 .. floor(T/dt)`` and ``u``/``udot`` are recomputed
from the model at each stored sample. Classical RK4 is the general solver; the
closed forms are sampled on the identical grid when they apply.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .errors import DivergenceError
from .model import (
    ModelSpec,
    drift,
    drift_function,
    drift_time_derivative,
    exact_correlated,
    exact_negative,
    negative_blowup_time,
)
from .tables import read_table, write_table

logger = logging.getLogger(__name__)

DEFAULT_DIVERGENCE_BOUND = 1e12
DEFAULT_CHUNK_STEPS = 200_000
TRAJECTORY_COLUMNS = ("t", "x", "u", "udot")
METHODS = ("auto", "rk4", "exact")

_GRID_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution for one initial condition.

    When ``diverged`` is set the arrays stop at the last finite sample and
    ``divergence_time`` is the first grid time beyond the bound.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    spec: ModelSpec
    x0: float
    dt: float
    T: float
    diverged: bool = False
    divergence_time: Optional[float] = None
    crossed_zero: bool = False
    method: str = "rk4"

    def __post_init__(self) -> None:
        arrays = []
        for name in TRAJECTORY_COLUMNS:
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
            arrays.append(array)
        sizes = {array.size for array in arrays}
        if len(sizes) != 1:
            raise ValueError(f"trajectory arrays differ in length: {sorted(sizes)}")
        minimum = 1 if self.diverged else 2
        if arrays[0].size < minimum:
            raise ValueError(f"a trajectory needs at least {minimum} samples")

    # ------------------------------------------------------------------ queries
    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def duration(self) -> float:
        """Time covered by the stored samples (``T`` unless diverged)."""

        return float(self.t[-1])

    @property
    def meta(self) -> dict:
        payload = self.spec.as_dict()
        payload.update(
            x0=self.x0,
            dt=self.dt,
            T=self.T,
            method=self.method,
            samples=len(self),
            diverged=self.diverged,
            divergence_time=self.divergence_time,
            crossed_zero=self.crossed_zero,
        )
        return payload


class Chunk(NamedTuple):
    """Consecutive grid samples produced by :func:`stream`."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    divergence_time: Optional[float] = None


# ---------------------------------------------------------------------- grid helpers
def default_dt(spec: ModelSpec) -> float:
    """Resolve the fastest sinusoid with at least 1000 steps per period."""

    return min(1e-3, 2.0 * math.pi / (1000.0 * spec.fastest_frequency))


def steps_in(T: float, dt: float) -> int:
    """Whole steps of size ``dt`` in ``T``, tolerant of rounding in ``T / dt``."""

    ratio = T / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= _GRID_SLACK * max(1.0, ratio):
        return int(nearest)
    return int(math.floor(ratio))


def grid_size(T: float, dt: float) -> int:
    return steps_in(T, dt) + 1


def _check_grid(x0: float, T: float, dt: float) -> None:
    if not math.isfinite(x0):
        raise ValueError("x0 must be finite")
    if not (T > 0 and math.isfinite(T)):
        raise ValueError("T must be a positive finite number")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if dt > T:
        raise ValueError("dt must not exceed T")


def _resolve_method(spec: ModelSpec, method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown integration method {method!r}; expected one of {METHODS}")
    has_exact = spec.has_closed_form or (spec.has_negative_closed_form and spec.C != 0.0)
    if method == "exact" and not has_exact:
        raise ValueError("no closed form is available for this model")
    if method == "auto":
        return "exact" if has_exact else "rk4"
    return method


# ---------------------------------------------------------------------- RK4 core
def _rk4_march(
    spec: ModelSpec,
    x0: float,
    n: int,
    dt: float,
    bound: float,
    chunk_steps: int,
) -> Iterator[Tuple[int, np.ndarray, Optional[int]]]:
    """Yield ``(start_index, samples, diverged_index)`` blocks covering ``0 .. n-1``.

    ``diverged_index`` is the first grid index whose value left the bound; the
    block it terminates holds only the finite samples before it.
    """

    f = drift_function(spec)
    h = dt
    half = 0.5 * dt
    sixth = dt / 6.0
    x = float(x0)
    start = 0
    first = True
    while start < n:
        stop = min(n, start + chunk_steps)
        values: List[float] = []
        append = values.append
        i = start
        if first:
            append(x)
            i += 1
            first = False
        while i < stop:
            t = (i - 1) * h
            k1 = f(x, t)
            k2 = f(x + half * k1, t + half)
            k3 = f(x + half * k2, t + half)
            k4 = f(x + h * k3, t + h)
            x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not abs(x) <= bound:
                yield start, np.array(values, dtype=float), i
                return
            append(x)
            i += 1
        yield start, np.array(values, dtype=float), None
        start = stop


def _derived(spec: ModelSpec, t: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = np.asarray(drift(spec, x, t), dtype=float) + np.zeros_like(x)
    udot = np.asarray(drift_time_derivative(spec, x, t), dtype=float) + np.zeros_like(x)
    return u, udot


# ---------------------------------------------------------------------- closed-form sampling
def _exact_values(spec: ModelSpec, x0: float, t: np.ndarray, blowup: Optional[float]) -> np.ndarray:
    if spec.has_closed_form:
        return np.asarray(exact_correlated(spec, x0, t), dtype=float)
    if blowup is not None:
        t = t[t < blowup]
    if t.size == 0:
        return np.empty(0)
    try:
        return np.asarray(exact_negative(spec, x0, t), dtype=float)
    except DivergenceError:  # pragma: no cover - the grid was truncated before blow-up
        return np.empty(0)


def _exact_blowup(spec: ModelSpec, x0: float, T: float) -> Optional[float]:
    if spec.has_negative_closed_form:
        return negative_blowup_time(spec, x0, T)
    return None


def sample_closed_form(
    spec: ModelSpec,
    x0: float,
    T: float,
    dt: float,
    *,
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> Trajectory:
    """Build the uniform-grid trajectory from a closed-form solution.

    Case-2 solutions are truncated at blow-up, or earlier where the value
    leaves ``divergence_bound``, and flagged as diverged.
    """

    _check_grid(x0, T, dt)
    _resolve_method(spec, "exact")
    if spec.has_negative_closed_form and x0 <= 0:
        raise ValueError("the Case-2 closed form requires x0 > 0")
    n = grid_size(T, dt)
    t = np.arange(n, dtype=float) * dt
    blowup = _exact_blowup(spec, x0, float(t[-1]))
    x = _exact_values(spec, x0, t, blowup)
    diverged = x.size < n
    divergence_time = blowup if diverged else None
    outside = np.flatnonzero(~(np.abs(x) <= divergence_bound))
    if outside.size:
        x = x[: int(outside[0])]
        diverged = True
        divergence_time = float(t[int(outside[0])])
    t = t[: x.size]
    u, udot = _derived(spec, t, x)
    if diverged:
        logger.debug("Closed form for %s diverges at t=%s", spec.variant.value, divergence_time)
    return Trajectory(
        t=t,
        x=x,
        u=u,
        udot=udot,
        spec=spec,
        x0=float(x0),
        dt=float(dt),
        T=float(T),
        diverged=diverged,
        divergence_time=divergence_time,
        crossed_zero=bool(np.any(x < 0.0)),
        method="exact",
    )


# ---------------------------------------------------------------------- public solvers
def integrate(
    spec: ModelSpec,
    x0: float,
    T: float,
    dt: float,
    *,
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta on the variant's drift."""

    _check_grid(x0, T, dt)
    n = grid_size(T, dt)
    start, x, diverged_index = next(_rk4_march(spec, x0, n, dt, divergence_bound, n))
    t = np.arange(x.size, dtype=float) * dt
    divergence_time = None
    if diverged_index is not None:
        divergence_time = diverged_index * dt
        logger.debug("RK4 left |x| <= %g at t=%g", divergence_bound, divergence_time)
    u, udot = _derived(spec, t, x)
    return Trajectory(
        t=t,
        x=x,
        u=u,
        udot=udot,
        spec=spec,
        x0=float(x0),
        dt=float(dt),
        T=float(T),
        diverged=diverged_index is not None,
        divergence_time=divergence_time,
        crossed_zero=bool(np.any(x < 0.0)),
        method="rk4",
    )


def solve(
    spec: ModelSpec,
    x0: float,
    T: float,
    dt: Optional[float] = None,
    *,
    method: str = "auto",
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> Trajectory:
    """Dispatch to the closed form or RK4; ``dt=None`` uses :func:`default_dt`."""

    step = default_dt(spec) if dt is None else float(dt)
    chosen = _resolve_method(spec, method)
    if chosen == "exact":
        return sample_closed_form(spec, x0, T, step, divergence_bound=divergence_bound)
    return integrate(spec, x0, T, step, divergence_bound=divergence_bound)


def stream(
    spec: ModelSpec,
    x0: float,
    T: float,
    dt: float,
    *,
    chunk_steps: int = DEFAULT_CHUNK_STEPS,
    method: str = "auto",
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> Iterator[Chunk]:
    """Yield the trajectory in consecutive chunks of at most ``chunk_steps`` samples.

    The samples are identical to those of :func:`solve` with the same
    arguments. A chunk carrying ``divergence_time`` is the last one.
    """

    _check_grid(x0, T, dt)
    if chunk_steps < 1:
        raise ValueError("chunk_steps must be >= 1")
    n = grid_size(T, dt)
    chosen = _resolve_method(spec, method)

    if chosen == "rk4":
        for start, x, diverged_index in _rk4_march(spec, x0, n, dt, divergence_bound, chunk_steps):
            t = np.arange(start, start + x.size, dtype=float) * dt
            u, udot = _derived(spec, t, x)
            divergence_time = None if diverged_index is None else diverged_index * dt
            yield Chunk(t, x, u, udot, divergence_time)
            if divergence_time is not None:
                return
        return

    if spec.has_negative_closed_form and x0 <= 0:
        raise ValueError("the Case-2 closed form requires x0 > 0")
    blowup = _exact_blowup(spec, x0, (n - 1) * dt)
    for start in range(0, n, chunk_steps):
        stop = min(n, start + chunk_steps)
        t = np.arange(start, stop, dtype=float) * dt
        x = _exact_values(spec, x0, t, blowup)
        divergence_time = None
        if x.size < t.size:
            divergence_time = blowup
        outside = np.flatnonzero(~(np.abs(x) <= divergence_bound))
        if outside.size:
            x = x[: int(outside[0])]
            divergence_time = float(t[int(outside[0])])
        t = t[: x.size]
        u, udot = _derived(spec, t, x)
        yield Chunk(t, x, u, udot, divergence_time)
        if divergence_time is not None:
            return


# ---------------------------------------------------------------------- step refinement
def richardson_errors(spec: ModelSpec, x0: float, T: float, dt: float) -> Tuple[float, float]:
    """Sup-norm differences between RK4 runs at ``dt``/``dt/2`` and ``dt/2``/``dt/4``.

    Differences are taken on the coarse grid, which the finer grids contain.
    """

    runs = [integrate(spec, x0, T, dt / factor) for factor in (1, 2, 4)]
    if any(run.diverged for run in runs):
        raise DivergenceError("refinement run diverged", time=runs[-1].divergence_time)
    coarse = len(runs[0])
    x1 = runs[0].x
    x2 = runs[1].x[::2][:coarse]
    x4 = runs[2].x[::4][:coarse]
    return float(np.max(np.abs(x1 - x2))), float(np.max(np.abs(x2 - x4)))


def convergence_check(spec: ModelSpec, x0: float, T: float, dt: float) -> float:
    """Observed order ``log2(e1/e2)`` of the Richardson triplet.

    Returns ``nan`` when both differences vanish (an exactly represented
    solution has no measurable order).
    """

    e1, e2 = richardson_errors(spec, x0, T, dt)
    if e1 == 0.0 and e2 == 0.0:
        return math.nan
    if e2 == 0.0:
        return math.inf
    return math.log2(e1 / e2)


# ---------------------------------------------------------------------- serialization
def write_trajectory_csv(traj: Trajectory, path: Union[str, Path], *, stride: int = 1) -> Path:
    """Write ``t, x, u, udot`` rows; ``stride`` keeps every n-th sample."""

    if stride < 1:
        raise ValueError("stride must be >= 1")
    columns = [getattr(traj, name)[::stride] for name in TRAJECTORY_COLUMNS]
    return write_table(path, TRAJECTORY_COLUMNS, columns)


def read_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read a trajectory CSV back as ``(t, x, u, udot)`` arrays."""

    _, rows = read_table(path, TRAJECTORY_COLUMNS)
    return rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]


__all__ = [
    "Chunk",
    "DEFAULT_DIVERGENCE_BOUND",
    "METHODS",
    "TRAJECTORY_COLUMNS",
    "Trajectory",
    "convergence_check",
    "default_dt",
    "grid_size",
    "steps_in",
    "integrate",
    "read_csv",
    "richardson_errors",
    "sample_closed_form",
    "solve",
    "stream",
    "write_trajectory_csv",
]
