"""Runners behind the figure presets and CLI commands.

Every runner has the signature ``runner(config, artifacts)``. Per-scenario
work happens in module-level task functions so a process pool can run them;
each task writes its own files and returns a plain record that the calling
process adds to the :class:`ArtifactSet`.
"""

from __future__ import annotations

import itertools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

from ..analysis.density import count_modes, estimate_density, support_width, write_density_csv
from ..analysis.fisher import fisher_series, omega_sweep, write_series_csv, write_sweep_csv
from ..config.loader import Scenario, ScenarioConfig
from ..core.errors import ConfigError, DivergenceError
from ..core.integrate import Trajectory, solve, write_trajectory_csv
from ..core.progress import SCENARIO_DIVERGED, SCENARIO_FINISHED, SCENARIO_STARTED
from ..core.workers import map_ordered
from .artifacts import ArtifactSet
from .runner import label_for, max_x_sweep, mean_value, resilience_study, write_max_x_csv, write_resilience_csv

logger = logging.getLogger(__name__)

Task = Tuple[ScenarioConfig, Scenario, Path]


# ---------------------------------------------------------------------- shared helpers
def _solve(config: ScenarioConfig, scenario: Scenario) -> Trajectory:
    return solve(
        scenario.spec,
        scenario.x0,
        config.T,
        config.dt,
        method=config.method,
        divergence_bound=config.divergence_bound,
    )


def _base_record(scenario: Scenario) -> Dict[str, Any]:
    record = {"name": scenario.name, "x0": scenario.x0}
    record.update(scenario.spec.as_dict())
    return record


def _trajectory_record(scenario: Scenario, traj: Trajectory) -> Dict[str, Any]:
    record = _base_record(scenario)
    record.update(traj.meta)
    return record


def _series_options(config: ScenarioConfig) -> Dict[str, Any]:
    return dict(
        n_points=config.n_points,
        T_step=config.T_step,
        dt=config.dt,
        method=config.method,
        estimator=config.estimator,
        eps_u=config.eps_u,
        eps_rel=config.eps_rel,
        t_resolution=config.t_resolution,
        bins=config.bins,
        density_floor=config.density_floor,
        tail_fraction=config.tail_fraction,
        divergence_bound=config.divergence_bound,
    )


def _fan_out(
    config: ScenarioConfig,
    artifacts: ArtifactSet,
    task: Callable[[Task], Dict[str, Any]],
    scenarios: Sequence[Scenario],
) -> List[Dict[str, Any]]:
    for scenario in scenarios:
        artifacts.bus.publish(SCENARIO_STARTED, {"name": scenario.name})
    jobs = [(config, scenario, artifacts.directory) for scenario in scenarios]
    records = map_ordered(task, jobs, config.workers)
    for record in records:
        _collect(artifacts, record)
    return records


def _collect(artifacts: ArtifactSet, record: Dict[str, Any]) -> None:
    for name in record.get("files", ()):
        artifacts.add(artifacts.directory / name)
    artifacts.record(record)
    event = SCENARIO_DIVERGED if record.get("diverged") else SCENARIO_FINISHED
    artifacts.bus.publish(event, record)


def _density_summary(config: ScenarioConfig, traj: Trajectory, path: Path) -> Dict[str, Any]:
    d = estimate_density(traj, config.bins)
    write_density_csv(d, path)
    return {
        "bins": d.bins,
        "modes": count_modes(d, config.prominence),
        "mode_locations": d.mode_locations(config.prominence),
        "support": list(d.support),
        "support_width": support_width(d),
        "A": d.A,
    }


# ---------------------------------------------------------------------- per-scenario tasks
def _trace_task(job: Task) -> Dict[str, Any]:
    config, scenario, directory = job
    traj = _solve(config, scenario)
    name = f"{scenario.name}.csv"
    write_trajectory_csv(traj, directory / name, stride=config.trace_stride)
    record = _trajectory_record(scenario, traj)
    record.update(files=[name], trace_stride=config.trace_stride)
    if not traj.diverged:
        record["mean"] = mean_value(traj)
    return record


def _density_task(job: Task) -> Dict[str, Any]:
    config, scenario, directory = job
    traj = _solve(config, scenario)
    record = _trajectory_record(scenario, traj)
    if traj.diverged:
        record["files"] = []
        return record
    name = f"{scenario.name}.csv"
    record.update(_density_summary(config, traj, directory / name))
    record["files"] = [name]
    return record


def _series_summary(config: ScenarioConfig, scenario: Scenario, path: Path) -> Dict[str, Any]:
    try:
        series = fisher_series(scenario.spec, scenario.x0, **_series_options(config))
    except DivergenceError as exc:
        return {"diverged": True, "divergence_time": exc.time, "written": False}
    write_series_csv(series, path)
    return {
        "diverged": False,
        "written": True,
        "asymptote": series.asymptote,
        "eps_u": series.eps_u,
        "x_resolution": None if series.resolution is None else series.resolution.h,
        "plateau_spread": series.plateau_spread(),
    }


def _series_task(job: Task) -> Dict[str, Any]:
    config, scenario, directory = job
    name = f"{scenario.name}.csv"
    record = _base_record(scenario)
    record.update(_series_options(config))
    record.update(_series_summary(config, scenario, directory / name))
    record["files"] = [name] if record.pop("written") else []
    return record


def _mean_task(job: Task) -> Dict[str, Any]:
    config, scenario, _ = job
    traj = _solve(config, scenario)
    record = _trajectory_record(scenario, traj)
    record["files"] = []
    record["label"] = label_for(scenario.spec).value
    record["mean"] = None if traj.diverged else mean_value(traj)
    return record


def _scenario_task(job: Task) -> Dict[str, Any]:
    """Trajectory, density and FI series for one custom scenario."""

    config, scenario, directory = job
    traj = _solve(config, scenario)
    trajectory_name = f"{scenario.name}_trajectory.csv"
    write_trajectory_csv(traj, directory / trajectory_name, stride=config.trace_stride)
    record = _trajectory_record(scenario, traj)
    record.update(files=[trajectory_name], trace_stride=config.trace_stride)
    if traj.diverged:
        return record
    record["mean"] = mean_value(traj)
    density_name = f"{scenario.name}_density.csv"
    record["density"] = _density_summary(config, traj, directory / density_name)
    record["files"].append(density_name)
    fisher_name = f"{scenario.name}_fisher.csv"
    summary = _series_summary(config, scenario, directory / fisher_name)
    if summary.pop("written"):
        record["files"].append(fisher_name)
    record["fisher"] = summary
    return record


# ---------------------------------------------------------------------- runners
def run_traces(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    _fan_out(config, artifacts, _trace_task, config.expand())


def run_densities(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    _fan_out(config, artifacts, _density_task, config.expand())


def run_fisher_series(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    _fan_out(config, artifacts, _series_task, config.expand())


def run_scenarios(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    _fan_out(config, artifacts, _scenario_task, config.expand())


def run_fisher_sweep(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    """One asymptotic-FI sweep over ``omega`` per (N0, x0, forcing) combination."""

    forcings = config.forcing or (None,)
    for N0, x0, forcing in itertools.product(config.N0, config.x0, forcings):
        changes: Dict[str, Any] = {"N0": N0}
        if forcing is not None:
            changes.update(B1=forcing.B1, omega1=forcing.omega1)
        template = config.base_spec(**changes)
        label = f"sweep_{template.variant.value}_N0={N0:g}_x0={x0:g}"
        if forcing is not None:
            label += f"_B1={forcing.B1:g}_omega1={forcing.omega1:g}"
        artifacts.bus.publish(SCENARIO_STARTED, {"name": label})
        points = omega_sweep(template, x0, config.omega, workers=config.workers, **_series_options(config))
        name = f"{label}.csv"
        write_sweep_csv(points, artifacts.directory / name)
        finite = [point for point in points if not point.diverged]
        best = max(finite, key=lambda point: point.asymptote).omega if finite else None
        record = {"name": label, "x0": x0, "files": [name]}
        record.update(template.as_dict())
        record.pop("omega")
        record.update(
            _series_options(config),
            points=[point._asdict() for point in points],
            argmax_omega=best,
            diverged=any(point.diverged for point in points),
        )
        _collect(artifacts, record)


def run_max_x(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    template = config.base_spec()
    if not template.has_closed_form or template.B != 0.0 or config.forcing:
        raise ConfigError("variant", "the max-x sweep needs the unforced correlated model with B = 0")
    for N0, x0 in itertools.product(config.N0, config.x0):
        spec = template.replace(N0=N0)
        if not 0.0 < x0 < spec.K:
            raise ConfigError("x0", "the max-x sweep needs 0 < x0 < K")
        label = f"max_x_N0={N0:g}_x0={x0:g}"
        points = max_x_sweep(spec, x0, config.omega)
        name = f"{label}.csv"
        write_max_x_csv(points, artifacts.directory / name)
        record = {"name": label, "N0": N0, "x0": x0, "K": spec.K, "files": [name]}
        record["points"] = [point._asdict() for point in points]
        record["ratio_lowest_to_highest_omega"] = points[0].max_x / points[-1].max_x
        _collect(artifacts, record)


def run_means(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    records = _fan_out(config, artifacts, _mean_task, config.expand(include_forcing=False))
    rows = [
        {key: record[key] for key in ("name", "N0", "omega", "x0", "label", "mean", "diverged")}
        for record in records
    ]
    artifacts.write_json(f"{config.preset or 'means'}.json", {"rows": rows, "T": config.T})


def run_resilience(config: ScenarioConfig, artifacts: ArtifactSet) -> None:
    """Resilience study per (N0, omega, x0), pivoted into one JSON table."""

    if not config.forcing:
        raise ConfigError("forcing", "the resilience study needs at least one forcing entry")
    grid = [(entry.B1, entry.omega1) for entry in config.forcing]
    reports = []
    for scenario in config.expand(include_forcing=False):
        artifacts.bus.publish(SCENARIO_STARTED, {"name": scenario.name})
        report = resilience_study(
            scenario.spec,
            scenario.x0,
            grid,
            T=config.T,
            dt=config.dt,
            method=config.method,
            divergence_bound=config.divergence_bound,
            workers=config.workers,
        )
        name = f"resilience_{scenario.name}.csv"
        write_resilience_csv(report, artifacts.directory / name)
        record = {"name": scenario.name, "files": [name], "N0": scenario.spec.N0}
        record.update(report.as_dict())
        record["diverged"] = any(entry.diverged for entry in report.entries)
        record["crossed_zero"] = any(entry.crossed_zero for entry in report.entries)
        _collect(artifacts, record)
        reports.append(report)

    rows = []
    diverged_runs = []
    for index, (B1, omega1) in enumerate(grid):
        entries = [report.entries[index] for report in reports]
        for report, entry in zip(reports, entries):
            if entry.diverged:
                diverged_runs.append(
                    {
                        "B1": B1,
                        "omega1": omega1,
                        "omega": report.omega,
                        "x0": report.x0,
                        "divergence_time": entry.divergence_time,
                        "crossed_zero": entry.crossed_zero,
                    }
                )
        rows.append(
            {
                "B1": B1,
                "omega1": omega1,
                "comparable": not any(entry.diverged for entry in entries),
                "columns": [
                    {
                        "omega": report.omega,
                        "x0": report.x0,
                        "label": report.label.value,
                        "baseline_mean": report.baseline_mean,
                        "perturbed_mean": entry.perturbed_mean,
                        "percent_change": entry.percent_change,
                        "diverged": entry.diverged,
                        "crossed_zero": entry.crossed_zero,
                    }
                    for report, entry in zip(reports, entries)
                ],
            }
        )
    if diverged_runs:
        logger.warning("%d forced runs diverged; their rows are left out of any ordering", len(diverged_runs))
    payload = {
        "baseline": [
            {"omega": r.omega, "x0": r.x0, "label": r.label.value, "mean": r.baseline_mean} for r in reports
        ],
        "rows": rows,
        "diverged_runs": diverged_runs,
        "T": config.T,
    }
    artifacts.write_json(f"{config.preset or 'resilience'}.json", payload)


__all__ = [
    "run_densities",
    "run_fisher_series",
    "run_fisher_sweep",
    "run_max_x",
    "run_means",
    "run_resilience",
    "run_scenarios",
    "run_traces",
]
