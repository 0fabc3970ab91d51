from __future__ import annotations

import math

import numpy as np
import pytest

from verhulst.core.errors import DivergenceError
from verhulst.core.integrate import (
    TRAJECTORY_COLUMNS,
    Trajectory,
    convergence_check,
    default_dt,
    grid_size,
    integrate,
    read_csv,
    richardson_errors,
    sample_closed_form,
    solve,
    steps_in,
    stream,
    write_trajectory_csv,
)
from verhulst.core.model import ModelSpec, Variant, exact_correlated, exact_negative
from verhulst.core.tables import read_table


# ---------------------------------------------------------------------- grid
def test_default_dt_resolves_fastest_sinusoid():
    assert default_dt(ModelSpec(omega=1.0)) == 1e-3
    assert default_dt(ModelSpec(omega=10.0)) == pytest.approx(2 * math.pi / 10000)
    assert default_dt(ModelSpec(omega=1.0, B1=1.0, omega1=20.0)) == pytest.approx(2 * math.pi / 20000)


@pytest.mark.parametrize("T, dt, steps", [(1.0, 0.1, 10), (0.3, 0.1, 3), (1.05, 0.1, 10), (50.0, 1e-3, 50000)])
def test_steps_in_tolerates_rounding(T, dt, steps):
    assert steps_in(T, dt) == steps
    assert grid_size(T, dt) == steps + 1


def test_grid_is_uniform(correlated):
    traj = integrate(correlated, 0.1, 2.0, 0.01)
    assert len(traj) == 201
    np.testing.assert_allclose(np.diff(traj.t), 0.01)
    assert traj.t[0] == 0.0
    assert traj.duration == pytest.approx(2.0)


@pytest.mark.parametrize("x0, T, dt", [(math.nan, 1.0, 0.1), (0.1, -1.0, 0.1), (0.1, 1.0, 0.0), (0.1, 1.0, 2.0)])
def test_invalid_grids_raise(correlated, x0, T, dt):
    with pytest.raises(ValueError):
        integrate(correlated, x0, T, dt)


def test_trajectory_arrays_are_read_only(correlated):
    traj = integrate(correlated, 0.1, 1.0, 0.1)
    for name in TRAJECTORY_COLUMNS:
        assert not getattr(traj, name).flags.writeable


def test_trajectory_meta(correlated):
    meta = integrate(correlated, 0.1, 1.0, 0.1).meta
    assert meta["variant"] == "correlated"
    assert meta["dt"] == 0.1
    assert meta["samples"] == 11
    assert meta["diverged"] is False


# ---------------------------------------------------------------------- RK4 against closed forms
def test_fixed_point_stays_fixed(correlated):
    traj = integrate(correlated, correlated.K, 20.0, 0.01)
    assert np.all(traj.x == correlated.K)
    assert np.all(traj.u == 0.0)
    assert np.all(traj.udot == 0.0)


@pytest.mark.parametrize("omega", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
@pytest.mark.parametrize("x0", [0.1, 5.0])
def test_rk4_matches_correlated_closed_form(omega, x0):
    spec = ModelSpec(N0=5.0, omega=omega)
    traj = integrate(spec, x0, 50.0, 1e-3)
    assert np.max(np.abs(traj.x - exact_correlated(spec, x0, traj.t))) < 1e-6


@pytest.mark.parametrize("omega", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("N0", [0.5, 1.0])
def test_rk4_matches_negative_closed_form(N0, omega):
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=N0, omega=omega)
    traj = integrate(spec, 0.1, 50.0, 1e-3)
    assert not traj.diverged
    assert np.max(np.abs(traj.x - exact_negative(spec, 0.1, traj.t))) < 1e-6


def test_sampled_closed_form_shares_the_grid(correlated):
    exact = sample_closed_form(correlated, 0.1, 5.0, 1e-3)
    rk4 = integrate(correlated, 0.1, 5.0, 1e-3)
    np.testing.assert_array_equal(exact.t, rk4.t)
    np.testing.assert_allclose(exact.x, rk4.x, atol=1e-6)
    np.testing.assert_allclose(exact.u, rk4.u, atol=1e-4)
    assert exact.method == "exact"


def test_solve_method_dispatch(correlated):
    assert solve(correlated, 0.1, 1.0).method == "exact"
    assert solve(correlated, 0.1, 1.0, method="rk4").method == "rk4"
    assert solve(correlated.replace(B1=1.0), 0.1, 1.0).method == "rk4"
    with pytest.raises(ValueError):
        solve(correlated.replace(B1=1.0), 0.1, 1.0, method="exact")
    with pytest.raises(ValueError):
        solve(correlated, 0.1, 1.0, method="euler")


# ---------------------------------------------------------------------- divergence
def test_case2_blowup_is_flagged_by_closed_form():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=10.0, omega=0.1)
    traj = solve(spec, 0.1, 100.0)
    assert traj.diverged
    assert traj.divergence_time == pytest.approx(33.42, abs=0.01)
    assert traj.t[-1] < traj.divergence_time
    assert np.all(np.isfinite(traj.x))


def test_case2_blowup_is_flagged_by_rk4():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=10.0, omega=0.1)
    traj = integrate(spec, 0.1, 100.0, 1e-3)
    assert traj.diverged
    assert 30.0 < traj.divergence_time < 35.0
    assert np.all(np.abs(traj.x) <= 1e12)


def test_case2_bounded_regime_over_long_horizon():
    for N0 in (0.5, 1.0):
        spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=N0, omega=1.0)
        traj = solve(spec, 0.1, 1000.0)
        assert not traj.diverged
        assert len(traj) == grid_size(1000.0, default_dt(spec))


def test_crossed_zero_flag(correlated):
    assert integrate(correlated.replace(B1=1.0), -0.5, 0.5, 0.01).crossed_zero
    assert not integrate(correlated, 0.1, 0.5, 0.01).crossed_zero


# ---------------------------------------------------------------------- streaming
def test_stream_reproduces_rk4_samples():
    spec = ModelSpec(N0=5.0, omega=1.0, B1=1.0, omega1=math.sqrt(2.0))
    whole = integrate(spec, 0.1, 3.0, 1e-3)
    chunks = list(stream(spec, 0.1, 3.0, 1e-3, chunk_steps=777))
    assert len(chunks) == math.ceil(len(whole) / 777)
    np.testing.assert_array_equal(np.concatenate([c.t for c in chunks]), whole.t)
    np.testing.assert_array_equal(np.concatenate([c.x for c in chunks]), whole.x)
    np.testing.assert_array_equal(np.concatenate([c.udot for c in chunks]), whole.udot)


def test_stream_reproduces_closed_form_samples(correlated):
    whole = sample_closed_form(correlated, 0.1, 3.0, 1e-3)
    chunks = list(stream(correlated, 0.1, 3.0, 1e-3, chunk_steps=500))
    np.testing.assert_array_equal(np.concatenate([c.x for c in chunks]), whole.x)


def test_stream_stops_at_divergence():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=10.0, omega=0.1)
    chunks = list(stream(spec, 0.1, 100.0, 1e-3, chunk_steps=10_000))
    assert chunks[-1].divergence_time == pytest.approx(33.42, abs=0.01)
    assert all(c.divergence_time is None for c in chunks[:-1])


# ---------------------------------------------------------------------- step refinement
def test_convergence_order_is_four(correlated):
    assert convergence_check(correlated, 0.1, 10.0, 0.1) == pytest.approx(4.0, abs=0.3)


def test_linear_growth_truncation_error():
    # dx/dt = x
    spec = ModelSpec(Variant.POSITIVE_ONLY, B=1.0, N0=0.0, C=0.0)
    traj = integrate(spec, 1.0, 1.0, 0.1)
    error = abs(traj.x[-1] - math.e)
    assert 2.08e-6 / 2 < error < 2.08e-6 * 2


def test_constant_solution_has_no_refinement_error(correlated):
    assert richardson_errors(correlated, correlated.K, 5.0, 0.1) == (0.0, 0.0)
    assert math.isnan(convergence_check(correlated, correlated.K, 5.0, 0.1))


def test_refinement_of_diverging_run_raises():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=10.0, omega=0.1)
    with pytest.raises(DivergenceError):
        richardson_errors(spec, 0.1, 40.0, 0.01)


# ---------------------------------------------------------------------- CSV
def test_trajectory_csv(tmp_path, correlated):
    traj = integrate(correlated, 0.1, 1.0, 0.01)
    path = write_trajectory_csv(traj, tmp_path / "trace.csv")
    header, _ = read_table(path)
    assert header == list(TRAJECTORY_COLUMNS)
    t, x, u, udot = read_csv(path)
    np.testing.assert_array_equal(x, traj.x)
    np.testing.assert_array_equal(udot, traj.udot)
    assert path.read_bytes().count(b"\r") == 0


def test_trajectory_csv_stride(tmp_path, correlated):
    traj = integrate(correlated, 0.1, 1.0, 0.01)
    t, _, _, _ = read_csv(write_trajectory_csv(traj, tmp_path / "trace.csv", stride=10))
    np.testing.assert_array_equal(t, traj.t[::10])


def test_trajectory_requires_two_samples(correlated):
    with pytest.raises(ValueError):
        Trajectory(t=[0.0], x=[1.0], u=[0.0], udot=[0.0], spec=correlated, x0=1.0, dt=0.1, T=0.1)
