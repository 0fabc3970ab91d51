"""Fisher Information of occupancy densities and of trajectories.

Two estimators are provided:

* density domain - ``sum (dp/dx)^2 / p * dx`` over the bins of a
  :class:`~verhulst.analysis.density.DensityEstimate`;
* time domain - the mean of ``udot^2 / s^4`` over the sampling grid, where
  ``s`` is the speed ``|u|`` seen at a finite resolution.

The raw time-domain integrand diverges at turning points (``u = 0``), so the
time estimator resolves the trajectory no finer than the occupancy histogram
does::

    s^2 = max(u^2 + h |udot| + (tau udot)^2, eps_u^2)

``h`` is the x-resolution (``K / bins`` unless given), ``tau`` the time
resolution and ``eps_u`` a floor for the saturated stretches near ``0`` and
``K`` where ``u`` and ``udot`` vanish together. ``eps_u`` defaults to
``eps_rel * max|u|`` over the trajectory and is always reported. With
``h = tau = 0`` the plain floored form ``max(|u|, eps_u)`` is recovered.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import DivergenceError
from ..core.integrate import (
    DEFAULT_CHUNK_STEPS,
    DEFAULT_DIVERGENCE_BOUND,
    Trajectory,
    default_dt,
    steps_in,
    stream,
)
from ..core.model import ModelSpec
from ..core.tables import write_table
from ..core.workers import map_ordered
from .density import DEFAULT_BINS, DensityEstimate, bin_indices, density_edges, density_from_counts

logger = logging.getLogger(__name__)

DEFAULT_EPS_REL = 4e-3
DEFAULT_T_RESOLUTION = 0.12
DEFAULT_DENSITY_FLOOR = 1e-12
DEFAULT_TAIL_FRACTION = 0.2
DEFAULT_EPS_FACTORS = (0.1, 0.3, 1.0, 3.0, 10.0)
SERIES_COLUMNS = ("T", "I")
SWEEP_COLUMNS = ("omega", "I_asymptote")


class Estimator(str, Enum):
    TIME = "time"
    DENSITY = "density"


class Resolution(NamedTuple):
    """Regularization of the time-domain integrand."""

    eps_u: float
    h: float
    tau: float


# ---------------------------------------------------------------------- density domain
def fisher_from_density(d: DensityEstimate, floor: float = DEFAULT_DENSITY_FLOOR) -> float:
    """Discretized ``integral (1/p) (dp/dx)^2 dx``.

    Derivatives are central differences on bin centres (one-sided in the end
    bins). Bins with ``p <= floor * max(p)`` are left out of the quotient.
    """

    p = d.p
    if p.size < 2:
        return 0.0
    slope = np.gradient(p, d.centers)
    keep = p > floor * float(np.max(p))
    return float(np.sum(slope[keep] ** 2 / p[keep] * d.widths[keep]))


# ---------------------------------------------------------------------- time domain
def resolve_eps_u(max_abs_u: float, eps_u: Optional[float] = None, eps_rel: float = DEFAULT_EPS_REL) -> float:
    if eps_u is not None:
        if not eps_u > 0:
            raise ValueError("eps_u must be > 0")
        return float(eps_u)
    if not eps_rel > 0:
        raise ValueError("eps_rel must be > 0")
    return float(eps_rel * max_abs_u)


def resolve_resolution(
    spec: ModelSpec,
    eps: float,
    *,
    x_resolution: Optional[float] = None,
    t_resolution: float = DEFAULT_T_RESOLUTION,
    bins: int = DEFAULT_BINS,
) -> Resolution:
    """Bundle the floor with the x- and time-resolution of the estimator.

    Parameters:
        spec: model whose carrying capacity sets the default x-resolution.
        eps: resolved floor on the speed.
        x_resolution: explicit ``h``; ``spec.K / bins`` when omitted.
        t_resolution: ``tau`` in time units.
        bins: histogram size the default x-resolution matches.

    Returns:
        The :class:`Resolution` shared by every horizon of a run.
    """

    h = spec.K / bins if x_resolution is None else float(x_resolution)
    if h < 0 or not math.isfinite(h):
        raise ValueError("x_resolution must be finite and >= 0")
    if t_resolution < 0 or not math.isfinite(t_resolution):
        raise ValueError("t_resolution must be finite and >= 0")
    return Resolution(float(eps), h, float(t_resolution))


def _speed_squared(u: np.ndarray, udot: np.ndarray, res: Resolution) -> np.ndarray:
    resolved = u * u + res.h * np.abs(udot) + (res.tau * udot) ** 2
    return np.maximum(resolved, res.eps_u * res.eps_u)


def _integrand(u: np.ndarray, udot: np.ndarray, res: Resolution) -> np.ndarray:
    square = _speed_squared(u, udot, res)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = udot * udot / (square * square)
    return np.where(udot == 0.0, 0.0, terms)


def _time_floor(traj: Trajectory, eps_u: Optional[float], eps_rel: float) -> Optional[float]:
    if traj.diverged:
        raise ValueError("cannot compute Fisher Information of a diverged trajectory")
    if not np.any(traj.udot[:-1]):
        return None
    eps = resolve_eps_u(float(np.max(np.abs(traj.u))), eps_u, eps_rel)
    if eps == 0.0:
        raise ValueError("eps_u resolved to 0; pass an explicit eps_u")
    return eps


def fisher_time_average(
    traj: Trajectory,
    eps_u: Optional[float] = None,
    *,
    eps_rel: float = DEFAULT_EPS_REL,
    x_resolution: Optional[float] = None,
    t_resolution: float = DEFAULT_T_RESOLUTION,
    bins: int = DEFAULT_BINS,
) -> float:
    """``(1/T) sum_i udot_i^2 / s_i^4 * dt`` over the grid intervals."""

    eps = _time_floor(traj, eps_u, eps_rel)
    if eps is None:
        return 0.0
    res = resolve_resolution(traj.spec, eps, x_resolution=x_resolution, t_resolution=t_resolution, bins=bins)
    terms = _integrand(traj.u[:-1], traj.udot[:-1], res)
    return float(np.sum(terms) * traj.dt / traj.duration)


def fisher_time_average_density_form(
    traj: Trajectory,
    eps_u: Optional[float] = None,
    *,
    eps_rel: float = DEFAULT_EPS_REL,
    x_resolution: Optional[float] = None,
    t_resolution: float = DEFAULT_T_RESOLUTION,
    bins: int = DEFAULT_BINS,
) -> float:
    """``integral (1/A) (dp/dt)^2 dt`` with ``p = A / s`` and ``A = 1/T``."""

    eps = _time_floor(traj, eps_u, eps_rel)
    if eps is None:
        return 0.0
    res = resolve_resolution(traj.spec, eps, x_resolution=x_resolution, t_resolution=t_resolution, bins=bins)
    u, udot = traj.u[:-1], traj.udot[:-1]
    A = 1.0 / traj.duration
    square = _speed_squared(u, udot, res)
    dp_dt = -A * np.where(u == 0.0, 1.0, np.sign(u)) * udot / square
    return float(np.sum(dp_dt * dp_dt / A) * traj.dt)


class EpsSample(NamedTuple):
    factor: float
    eps_u: float
    I: float


def eps_sensitivity(
    traj: Trajectory,
    factors: Sequence[float] = DEFAULT_EPS_FACTORS,
    *,
    eps_rel: float = DEFAULT_EPS_REL,
    x_resolution: Optional[float] = None,
    t_resolution: float = DEFAULT_T_RESOLUTION,
    bins: int = DEFAULT_BINS,
) -> List[EpsSample]:
    """Time-domain FI with the default floor scaled by each factor."""

    base = resolve_eps_u(float(np.max(np.abs(traj.u))), None, eps_rel)
    report = []
    for factor in factors:
        eps = base * float(factor)
        value = (
            fisher_time_average(traj, eps, x_resolution=x_resolution, t_resolution=t_resolution, bins=bins)
            if eps > 0
            else 0.0
        )
        report.append(EpsSample(float(factor), eps, value))
    return report


# ---------------------------------------------------------------------- series over T
@dataclass(frozen=True, eq=False)
class FisherSeries:
    """FI per observation horizon ``T`` with its trailing-mean asymptote."""

    T_values: np.ndarray
    I_values: np.ndarray
    asymptote: float
    estimator: Estimator = Estimator.TIME
    eps_u: Optional[float] = None
    tail_fraction: float = DEFAULT_TAIL_FRACTION
    resolution: Optional[Resolution] = None

    def __post_init__(self) -> None:
        T_values = np.array(self.T_values, dtype=float)
        I_values = np.array(self.I_values, dtype=float)
        if T_values.shape != I_values.shape:
            raise ValueError("T_values and I_values must have equal length")
        if np.any(np.diff(T_values) <= 0):
            raise ValueError("T_values must be strictly increasing")
        if np.any(I_values < 0):
            raise ValueError("Fisher Information values must be >= 0")
        T_values.setflags(write=False)
        I_values.setflags(write=False)
        object.__setattr__(self, "T_values", T_values)
        object.__setattr__(self, "I_values", I_values)
        object.__setattr__(self, "estimator", Estimator(self.estimator))

    @property
    def tail(self) -> np.ndarray:
        return self.I_values[-tail_length(self.I_values.size, self.tail_fraction):]

    def plateau_spread(self) -> float:
        """``(max - min) / mean`` over the trailing window; 0 for an all-zero tail."""

        tail = self.tail
        mean = float(np.mean(tail))
        if mean == 0.0:
            return 0.0
        return float((np.max(tail) - np.min(tail)) / mean)


def tail_length(size: int, fraction: float) -> int:
    if not 0.0 < fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    return max(1, int(math.ceil(size * fraction)))


def asymptote_of(values: np.ndarray, fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.mean(values[-tail_length(values.size, fraction):]))


def _horizon_indices(n_points: int, T_step: float, dt: float) -> np.ndarray:
    """Grid index of the last sample for each horizon ``k * T_step``."""

    indices = np.array([steps_in(k * T_step, dt) for k in range(1, n_points + 1)], dtype=np.int64)
    if np.any(indices < 1):
        raise ValueError("T_step must be at least one time step")
    return indices


def _scan(
    spec: ModelSpec, x0: float, T: float, dt: float, chunk_steps: int, method: str, bound: float
) -> Tuple[float, float, float]:
    """First pass: ``max|u|`` and the support of ``x`` over the whole horizon."""

    peak, lo, hi = 0.0, math.inf, -math.inf
    for chunk in stream(spec, x0, T, dt, chunk_steps=chunk_steps, method=method, divergence_bound=bound):
        if chunk.divergence_time is not None:
            raise DivergenceError(
                f"trajectory diverged at t={chunk.divergence_time:.6g}", time=chunk.divergence_time
            )
        if chunk.x.size:
            peak = max(peak, float(np.max(np.abs(chunk.u))))
            lo = min(lo, float(np.min(chunk.x)))
            hi = max(hi, float(np.max(chunk.x)))
    return peak, lo, hi


def fisher_series(
    spec: ModelSpec,
    x0: float,
    n_points: int = 1000,
    T_step: float = 10.0,
    *,
    dt: Optional[float] = None,
    method: str = "auto",
    estimator: Union[str, Estimator] = Estimator.TIME,
    eps_u: Optional[float] = None,
    eps_rel: float = DEFAULT_EPS_REL,
    x_resolution: Optional[float] = None,
    t_resolution: float = DEFAULT_T_RESOLUTION,
    bins: int = DEFAULT_BINS,
    density_floor: float = DEFAULT_DENSITY_FLOOR,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
    chunk_steps: int = DEFAULT_CHUNK_STEPS,
) -> FisherSeries:
    """FI for ``T = T_step, 2 T_step, ..., n_points T_step`` from one long run.

    The trajectory is streamed twice: once for ``max|u|`` (the default floor)
    and the support (fixed bins of the density estimator), then to accumulate
    per-horizon sums. The floor, the resolution and the bins are shared by
    every horizon.

    Parameters:
        spec: model to integrate.
        x0: initial value.
        n_points: number of horizons.
        T_step: spacing of the horizons.
        dt: sampling step; ``default_dt(spec)`` when omitted.
        method: ``auto``, ``rk4`` or ``exact``.
        estimator: ``time`` (resolved time average) or ``density`` (histogram).
        eps_u: absolute floor on the speed; overrides ``eps_rel``.
        eps_rel: floor relative to ``max|u|`` over the whole horizon.
        x_resolution: x-resolution of the time estimator; ``K / bins`` when omitted.
        t_resolution: time resolution of the time estimator.
        bins: histogram size of the density estimator.
        density_floor: relative density below which bins are skipped.
        tail_fraction: trailing share of the series averaged into the asymptote.
        divergence_bound: ``|x|`` beyond which the run counts as diverged.
        chunk_steps: samples per streamed chunk.

    Returns:
        The :class:`FisherSeries`, with the floor and resolution it used.

    Raises:
        DivergenceError: the trajectory left the bound.
    """

    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if not T_step > 0:
        raise ValueError("T_step must be > 0")
    kind = Estimator(estimator)
    step = default_dt(spec) if dt is None else float(dt)
    horizon = n_points * T_step
    ends = _horizon_indices(n_points, T_step, step)

    peak, lo, hi = _scan(spec, x0, horizon, step, chunk_steps, method, divergence_bound)
    eps = resolve_eps_u(peak, eps_u, eps_rel) if kind is Estimator.TIME else None
    res = None
    if eps:
        res = resolve_resolution(spec, eps, x_resolution=x_resolution, t_resolution=t_resolution, bins=bins)
    edges = density_edges(lo, hi, bins)

    values = np.zeros(n_points)
    k = 0
    running = 0.0
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    stop = 0
    for chunk in stream(spec, x0, horizon, step, chunk_steps=chunk_steps, method=method, divergence_bound=divergence_bound):
        if k >= n_points:
            break
        start, stop = stop, stop + chunk.t.size
        if kind is Estimator.TIME:
            if res is None:
                terms = np.zeros(chunk.t.size)
            else:
                terms = _integrand(chunk.u, chunk.udot, res)
            cumulative = running + np.cumsum(terms)
            # horizon k averages the intervals 0 .. ends[k] - 1
            while k < n_points and ends[k] - 1 < stop:
                values[k] = cumulative[ends[k] - 1 - start] / ends[k]
                k += 1
            if cumulative.size:
                running = float(cumulative[-1])
        else:
            index = bin_indices(edges, chunk.x)
            cursor = start
            while k < n_points and ends[k] < stop:
                counts += np.bincount(index[cursor - start: ends[k] + 1 - start], minlength=counts.size)
                cursor = ends[k] + 1
                T_k = ends[k] * step
                d = density_from_counts(edges, counts, A=1.0 / T_k, support=(lo, hi))
                values[k] = fisher_from_density(d, density_floor)
                k += 1
            counts += np.bincount(index[cursor - start:], minlength=counts.size)

    T_values = np.arange(1, n_points + 1, dtype=float) * T_step
    series = FisherSeries(
        T_values=T_values,
        I_values=values,
        asymptote=asymptote_of(values, tail_fraction),
        estimator=kind,
        eps_u=eps,
        tail_fraction=tail_fraction,
        resolution=res,
    )
    logger.debug(
        "FI series for %s omega=%g x0=%g: asymptote %.6g (%s)",
        spec.variant.value,
        spec.omega,
        x0,
        series.asymptote,
        kind.value,
    )
    return series


# ---------------------------------------------------------------------- sweeps over omega
class SweepPoint(NamedTuple):
    omega: float
    asymptote: float
    diverged: bool = False
    divergence_time: Optional[float] = None


def _sweep_task(task: Tuple[ModelSpec, float, Dict[str, Any]]) -> SweepPoint:
    spec, x0, options = task
    try:
        series = fisher_series(spec, x0, **options)
    except DivergenceError as exc:
        logger.warning("omega=%g diverged at t=%s; recorded without an asymptote", spec.omega, exc.time)
        return SweepPoint(spec.omega, math.nan, True, exc.time)
    return SweepPoint(spec.omega, series.asymptote)


def omega_sweep(
    spec_template: ModelSpec,
    x0: float,
    omegas: Iterable[float],
    *,
    workers: int = 1,
    **series_options: Any,
) -> List[SweepPoint]:
    """Asymptotic FI per modulation frequency, in input order.

    Extra keyword arguments go to :func:`fisher_series`. A diverging frequency
    yields a point with ``diverged=True`` and a NaN asymptote.
    """

    grid = [float(omega) for omega in omegas]
    if not grid:
        raise ValueError("omegas must not be empty")
    if any(not omega > 0 for omega in grid):
        raise ValueError("every omega must be > 0")
    tasks = [(spec_template.replace(omega=omega), x0, dict(series_options)) for omega in grid]
    return map_ordered(_sweep_task, tasks, workers)


# ---------------------------------------------------------------------- serialization
def write_series_csv(series: FisherSeries, path: Union[str, Path]) -> Path:
    return write_table(path, SERIES_COLUMNS, [series.T_values, series.I_values])


def write_sweep_csv(points: Sequence[SweepPoint], path: Union[str, Path]) -> Path:
    omegas = [point.omega for point in points]
    asymptotes = [point.asymptote for point in points]
    return write_table(path, SWEEP_COLUMNS, [omegas, asymptotes])


__all__ = [
    "DEFAULT_DENSITY_FLOOR",
    "DEFAULT_EPS_REL",
    "DEFAULT_T_RESOLUTION",
    "EpsSample",
    "Estimator",
    "FisherSeries",
    "Resolution",
    "SERIES_COLUMNS",
    "SWEEP_COLUMNS",
    "SweepPoint",
    "asymptote_of",
    "eps_sensitivity",
    "fisher_from_density",
    "fisher_series",
    "fisher_time_average",
    "fisher_time_average_density_form",
    "omega_sweep",
    "resolve_eps_u",
    "resolve_resolution",
    "tail_length",
    "write_series_csv",
    "write_sweep_csv",
]
