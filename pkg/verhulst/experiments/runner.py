"""Scenario-level measurements: time means, resilience under forcing, max-x sweeps."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.integrate import DEFAULT_DIVERGENCE_BOUND, Trajectory, default_dt, solve
from ..core.model import ModelSpec, max_x_closed_form, max_x_sampled
from ..core.tables import write_table
from ..core.workers import map_ordered

logger = logging.getLogger(__name__)

OPTIMAL_OMEGA = 1.0

RESILIENCE_COLUMNS = ("B1", "omega1", "perturbed_mean", "percent_change")
MAX_X_COLUMNS = ("omega", "max_x", "max_x_sampled")


def mean_value(traj: Trajectory) -> float:
    """Arithmetic mean of ``x`` over every grid sample."""

    if traj.diverged:
        raise ValueError("cannot average a diverged trajectory")
    return float(np.mean(traj.x))


def percent_change(baseline: float, perturbed: float) -> float:
    """``|baseline - perturbed| / |baseline| * 100``."""

    if baseline == 0:
        raise ValueError("baseline mean must be non-zero")
    return abs(baseline - perturbed) / abs(baseline) * 100.0


class Label(str, Enum):
    OPTIMAL = "Optimal"
    NON_OPTIMAL = "NonOptimal"


def label_for(spec: ModelSpec) -> Label:
    """``Optimal`` at ``omega = 1``; every other frequency is ``NonOptimal``."""

    return Label.OPTIMAL if math.isclose(spec.omega, OPTIMAL_OMEGA) else Label.NON_OPTIMAL


class ResilienceEntry(NamedTuple):
    B1: float
    omega1: float
    perturbed_mean: float
    percent_change: float
    diverged: bool = False
    crossed_zero: bool = False
    divergence_time: Optional[float] = None


@dataclass(frozen=True)
class ResilienceReport:
    """Baseline mean and per-forcing percent changes for one modulation frequency."""

    baseline_mean: float
    entries: Tuple[ResilienceEntry, ...]
    omega: float
    label: Label
    x0: float = math.nan
    T: float = math.nan
    dt: float = math.nan
    spec: Optional[ModelSpec] = field(default=None, compare=False)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "label": self.label.value,
            "x0": self.x0,
            "T": self.T,
            "dt": self.dt,
            "baseline_mean": self.baseline_mean,
            "entries": [entry._asdict() for entry in self.entries],
        }


def _forced_mean(task: Tuple[ModelSpec, float, float, float, str, float]) -> ResilienceEntry:
    spec, x0, T, dt, method, bound = task
    traj = solve(spec, x0, T, dt, method=method, divergence_bound=bound)
    if traj.diverged:
        logger.warning(
            "Forced run B1=%g omega1=%g diverged at t=%s", spec.B1, spec.omega1, traj.divergence_time
        )
        return ResilienceEntry(
            spec.B1, spec.omega1, math.nan, math.nan, True, traj.crossed_zero, traj.divergence_time
        )
    return ResilienceEntry(spec.B1, spec.omega1, mean_value(traj), math.nan, False, traj.crossed_zero)


def resilience_study(
    spec: ModelSpec,
    x0: float,
    forcing_grid: Iterable[Tuple[float, float]],
    *,
    T: float = 1000.0,
    dt: Optional[float] = None,
    method: str = "auto",
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
    workers: int = 1,
) -> ResilienceReport:
    """Compare the unforced time mean with the mean under each ``(B1, omega1)``.

    Every run shares one grid; without an explicit ``dt`` it is the finest
    default step among the baseline and all forced specs.
    """

    if spec.is_forced:
        raise ValueError("the baseline spec must be unforced (B1 = 0)")
    grid = [(float(B1), float(omega1)) for B1, omega1 in forcing_grid]
    if not grid:
        raise ValueError("forcing_grid must not be empty")
    forced = [spec.replace(B1=B1, omega1=omega1) for B1, omega1 in grid]
    step = dt if dt is not None else min(default_dt(s) for s in [spec, *forced])

    baseline = solve(spec, x0, T, step, method=method, divergence_bound=divergence_bound)
    if baseline.diverged:
        raise ValueError(f"baseline run diverged at t={baseline.divergence_time}")
    base_mean = mean_value(baseline)

    # forced runs have no closed form
    tasks = [(s, x0, T, step, method if not s.is_forced else "rk4", divergence_bound) for s in forced]
    entries = []
    for entry in map_ordered(_forced_mean, tasks, workers):
        if not entry.diverged:
            entry = entry._replace(percent_change=percent_change(base_mean, entry.perturbed_mean))
        entries.append(entry)

    report = ResilienceReport(
        baseline_mean=base_mean,
        entries=tuple(entries),
        omega=spec.omega,
        label=label_for(spec),
        x0=float(x0),
        T=float(T),
        dt=float(step),
        spec=spec,
    )
    logger.debug("Resilience at omega=%g: baseline mean %.6g", spec.omega, base_mean)
    return report


class MaxXPoint(NamedTuple):
    omega: float
    max_x: float
    max_x_sampled: float


def max_x_sweep(spec: ModelSpec, x0: float, omegas: Sequence[float], *, samples: int = 20001) -> List[MaxXPoint]:
    """Closed-form period maximum per ``omega`` next to a dense-sampling check."""

    if not spec.has_closed_form or spec.B != 0.0:
        raise ValueError("max_x_sweep requires the unforced correlated model with B = 0")
    points = []
    for omega in omegas:
        current = spec.replace(omega=float(omega))
        points.append(
            MaxXPoint(float(omega), max_x_closed_form(current, x0), max_x_sampled(current, x0, samples))
        )
    return points


def write_resilience_csv(report: ResilienceReport, path: Union[str, Path]) -> Path:
    entries = report.entries
    return write_table(
        path,
        RESILIENCE_COLUMNS,
        [
            [entry.B1 for entry in entries],
            [entry.omega1 for entry in entries],
            [entry.perturbed_mean for entry in entries],
            [entry.percent_change for entry in entries],
        ],
    )


def write_max_x_csv(points: Sequence[MaxXPoint], path: Union[str, Path]) -> Path:
    return write_table(
        path,
        MAX_X_COLUMNS,
        [[p.omega for p in points], [p.max_x for p in points], [p.max_x_sampled for p in points]],
    )


__all__ = [
    "Label",
    "MAX_X_COLUMNS",
    "MaxXPoint",
    "OPTIMAL_OMEGA",
    "RESILIENCE_COLUMNS",
    "ResilienceEntry",
    "ResilienceReport",
    "label_for",
    "max_x_sweep",
    "mean_value",
    "percent_change",
    "resilience_study",
    "write_max_x_csv",
    "write_resilience_csv",
]
