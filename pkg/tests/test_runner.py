from __future__ import annotations

import math

import numpy as np
import pytest

from verhulst.core.integrate import solve
from verhulst.core.model import ModelSpec
from verhulst.core.tables import read_table
from verhulst.experiments.runner import (
    Label,
    label_for,
    max_x_sweep,
    mean_value,
    percent_change,
    resilience_study,
    write_max_x_csv,
    write_resilience_csv,
)

TABLE_GRID = [(1.0, 1.0), (1.0, math.sqrt(2.0)), (10.0, 1.0), (10.0, math.sqrt(2.0))]


# ---------------------------------------------------------------------- means
def test_mean_of_constant_trajectory(correlated):
    assert mean_value(solve(correlated, correlated.K, 5.0)) == pytest.approx(correlated.K)


@pytest.mark.parametrize("omega, reported, tolerance", [(1.0, 5.5433, 0.10), (10.0, 0.1733, 0.15)])
def test_baseline_means(omega, reported, tolerance):
    spec = ModelSpec(N0=5.0, omega=omega)
    assert mean_value(solve(spec, 0.1, 1000.0)) == pytest.approx(reported, rel=tolerance)


@pytest.mark.parametrize("x0", [0.1, 5.0])
def test_halving_the_step_keeps_mean_and_peak(correlated, x0):
    coarse = solve(correlated, x0, 1000.0, 1e-3)
    fine = solve(correlated, x0, 1000.0, 5e-4)
    assert mean_value(fine) == pytest.approx(mean_value(coarse), rel=1e-3)
    assert np.max(fine.x) == pytest.approx(np.max(coarse.x), rel=1e-3)


def test_mean_of_diverged_run_raises():
    spec = ModelSpec("negative", B=1.0, C=1.0, N0=10.0, omega=0.1)
    with pytest.raises(ValueError):
        mean_value(solve(spec, 0.1, 100.0))


# ---------------------------------------------------------------------- percent change
def test_percent_change_values():
    assert percent_change(3.0, 3.0) == 0.0
    assert percent_change(5.5433, 6.3927) == pytest.approx(15.3, abs=0.05)
    assert percent_change(0.1733, 1.3103) == pytest.approx(656.1, abs=0.1)
    assert percent_change(2.0, 1.0) == pytest.approx(50.0)


def test_percent_change_needs_nonzero_baseline():
    with pytest.raises(ValueError):
        percent_change(0.0, 1.0)


# ---------------------------------------------------------------------- labels
def test_optimal_label():
    assert label_for(ModelSpec(N0=5.0, omega=1.0)) is Label.OPTIMAL
    assert label_for(ModelSpec(N0=5.0, omega=10.0)) is Label.NON_OPTIMAL
    assert label_for(ModelSpec(N0=1.0, omega=0.2)) is Label.NON_OPTIMAL
    assert label_for(ModelSpec(N0=1.0, omega=1.0)) is Label.OPTIMAL
    assert label_for(ModelSpec(N0=5.0, omega=0.5)) is Label.NON_OPTIMAL


# ---------------------------------------------------------------------- resilience
def test_zero_forcing_changes_nothing(correlated):
    report = resilience_study(correlated, 0.1, [(0.0, 1.0)], T=20.0)
    (entry,) = report.entries
    assert entry.percent_change == 0.0
    assert entry.perturbed_mean == report.baseline_mean


def test_report_structure(correlated):
    report = resilience_study(correlated, 0.1, TABLE_GRID, T=10.0, dt=1e-2)
    assert [(e.B1, e.omega1) for e in report.entries] == TABLE_GRID
    assert report.label is Label.OPTIMAL
    assert report.dt == 1e-2
    payload = report.as_dict()
    assert payload["label"] == "Optimal"
    assert len(payload["entries"]) == 4


def test_shared_grid_uses_finest_default_step(correlated):
    report = resilience_study(correlated, 0.1, [(1.0, 20.0)], T=1.0)
    assert report.dt == pytest.approx(2 * math.pi / 20000)


def test_resilience_rejects_forced_baseline(correlated):
    with pytest.raises(ValueError):
        resilience_study(correlated.replace(B1=1.0), 0.1, TABLE_GRID)
    with pytest.raises(ValueError):
        resilience_study(correlated, 0.1, [])


def test_incommensurate_forcing_blows_up_above_capacity():
    spec = ModelSpec(N0=5.0, omega=1.0)
    report = resilience_study(spec, 0.1, [(1.0, math.sqrt(2.0))], T=15.0)
    (entry,) = report.entries
    assert entry.diverged
    assert not entry.crossed_zero
    assert entry.divergence_time == pytest.approx(10.6, abs=0.5)
    assert math.isnan(entry.percent_change)


@pytest.mark.slow
def test_optimal_frequency_is_more_resilient():
    optimal = resilience_study(ModelSpec(N0=5.0, omega=1.0), 0.1, TABLE_GRID, T=1000.0)
    other = resilience_study(ModelSpec(N0=5.0, omega=10.0), 0.1, TABLE_GRID, T=1000.0)
    assert [entry.diverged for entry in optimal.entries] == [False, True, False, True]
    assert not any(entry.diverged for entry in other.entries)
    assert 15.3 / 2 < optimal.entries[0].percent_change < 15.3 * 2
    assert optimal.entries[2].percent_change == pytest.approx(64.6, rel=0.1)
    for index in (0, 2):
        assert optimal.entries[index].percent_change < other.entries[index].percent_change


def test_resilience_csv(tmp_path, correlated):
    report = resilience_study(correlated, 0.1, [(0.0, 1.0), (1.0, 1.0)], T=5.0)
    header, rows = read_table(write_resilience_csv(report, tmp_path / "resilience.csv"))
    assert header == ["B1", "omega1", "perturbed_mean", "percent_change"]
    assert rows.shape == (2, 4)


# ---------------------------------------------------------------------- max-x sweep
def test_max_x_sweep_is_strictly_decreasing():
    points = max_x_sweep(ModelSpec(N0=5.0), 0.1, [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0])
    values = [p.max_x for p in points]
    # omega <= 0.2 saturates at K in double precision
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert all(a > b for a, b in zip(values[1:], values[2:]))
    assert values[0] == pytest.approx(10.0, rel=1e-6)
    assert values[-1] == pytest.approx(0.2672, abs=1e-4)
    for p in points:
        assert p.max_x_sampled == pytest.approx(p.max_x, rel=1e-6)


def test_max_x_sweep_requires_unforced_correlated_model():
    with pytest.raises(ValueError):
        max_x_sweep(ModelSpec("positive"), 0.1, [1.0])


def test_max_x_csv(tmp_path):
    points = max_x_sweep(ModelSpec(N0=5.0), 0.1, [1.0, 10.0])
    header, rows = read_table(write_max_x_csv(points, tmp_path / "max_x.csv"))
    assert header == ["omega", "max_x", "max_x_sampled"]
    np.testing.assert_array_equal(rows[:, 0], [1.0, 10.0])
