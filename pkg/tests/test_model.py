from __future__ import annotations

import math

import numpy as np
import pytest

from verhulst.core.errors import ConfigError, DivergenceError
from verhulst.core.model import (
    ModelSpec,
    Variant,
    drift,
    drift_time_derivative,
    exact_correlated,
    exact_negative,
    growth_rate,
    max_x_closed_form,
    max_x_sampled,
    negative_blowup_time,
)


# ---------------------------------------------------------------------- spec
@pytest.mark.parametrize(
    "text, expected",
    [
        ("correlated", Variant.CORRELATED),
        ("positive", Variant.POSITIVE_ONLY),
        ("case1", Variant.POSITIVE_ONLY),
        ("NegativeOnly", Variant.NEGATIVE_ONLY),
        ("case2", Variant.NEGATIVE_ONLY),
    ],
)
def test_variant_aliases(text, expected):
    assert Variant.parse(text) is expected


@pytest.mark.parametrize(
    "changes, field",
    [({"omega": 0.0}, "omega"), ({"K": -1.0}, "K"), ({"N0": -0.5}, "N0"), ({"B1": -1.0}, "B1")],
)
def test_invalid_parameters_name_the_field(changes, field):
    with pytest.raises(ConfigError) as info:
        ModelSpec(**changes)
    assert info.value.field == field


def test_unknown_variant_is_rejected():
    with pytest.raises(ConfigError):
        ModelSpec(variant="gompertz")


def test_closed_form_flags():
    assert ModelSpec().has_closed_form
    assert not ModelSpec(B1=1.0, omega1=1.0).has_closed_form
    assert ModelSpec(Variant.NEGATIVE_ONLY).has_negative_closed_form
    assert ModelSpec(B1=1.0, omega1=3.0, omega=2.0).fastest_frequency == 3.0


# ---------------------------------------------------------------------- drift
def test_growth_rate_values():
    spec = ModelSpec(B=0.0, N0=5.0, omega=1.0)
    assert growth_rate(spec, 0.0) == 0.0
    assert growth_rate(spec, math.pi / 2) == pytest.approx(5.0)
    assert growth_rate(ModelSpec(B=2.0, N0=5.0, omega=2.0), math.pi / 4) == pytest.approx(7.0)


def test_drift_fixed_points(correlated):
    assert drift(correlated, 3.0, 0.0) == 0.0
    assert drift(correlated, correlated.K, 1.234) == 0.0
    reduced = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=0.0)
    assert drift(reduced, 10.0, 7.0) == pytest.approx(0.0)


def test_drift_time_derivative_at_origin(correlated):
    assert drift_time_derivative(correlated, 5.0, 0.0) == pytest.approx(12.5)
    assert drift_time_derivative(correlated, correlated.K, 2.0) == 0.0


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec(Variant.CORRELATED, N0=5.0, omega=1.0),
        ModelSpec(Variant.POSITIVE_ONLY, N0=1.0, omega=2.0, C=1.0),
        ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, N0=0.5, omega=0.5, C=1.0),
        ModelSpec(Variant.CORRELATED, N0=5.0, omega=1.0, B1=1.0, omega1=math.sqrt(2.0)),
    ],
    ids=["correlated", "positive", "negative", "forced"],
)
def test_drift_time_derivative_matches_finite_difference(spec):
    h = 1e-6
    for x, t in [(0.7, 0.3), (4.0, 1.9), (8.5, 5.2)]:
        u = drift(spec, x, t)
        ahead = drift(spec, x + u * h, t + h)
        behind = drift(spec, x - u * h, t - h)
        assert drift_time_derivative(spec, x, t) == pytest.approx((ahead - behind) / (2 * h), rel=1e-5, abs=1e-6)


@pytest.mark.parametrize(
    "spec, solution",
    [
        (ModelSpec(Variant.CORRELATED, N0=5.0, omega=1.0), exact_correlated),
        (ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, N0=1.0, omega=1.0, C=1.0), exact_negative),
    ],
    ids=["correlated", "negative"],
)
def test_drift_time_derivative_converges_along_exact_solutions(spec, solution):
    t = np.linspace(0.5, 9.5, 19)
    expected = drift_time_derivative(spec, solution(spec, 0.1, t), t)

    def error(h):
        ahead = drift(spec, solution(spec, 0.1, t + h), t + h)
        behind = drift(spec, solution(spec, 0.1, t - h), t - h)
        return float(np.max(np.abs((ahead - behind) / (2 * h) - expected)))

    errors = [error(h) for h in (2e-2, 1e-2, 5e-3)]
    for coarse, fine in zip(errors, errors[1:]):
        assert math.log2(coarse / fine) == pytest.approx(2.0, abs=0.2)


def test_evaluators_accept_arrays(correlated):
    t = np.linspace(0.0, 3.0, 7)
    assert drift(correlated, np.full(7, 2.0), t).shape == (7,)


# ---------------------------------------------------------------------- correlated closed form
def test_exact_correlated_initial_value(correlated):
    assert exact_correlated(correlated, 0.1, 0.0) == pytest.approx(0.1)


def test_exact_correlated_half_period(correlated):
    assert exact_correlated(correlated, 0.1, math.pi) == pytest.approx(9.9553, abs=1e-4)


@pytest.mark.parametrize("omega", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
def test_exact_correlated_is_periodic(omega):
    spec = ModelSpec(N0=5.0, omega=omega)
    periods = 2.0 * math.pi / omega * np.arange(1, 6)
    np.testing.assert_allclose(exact_correlated(spec, 0.1, periods), 0.1, rtol=1e-12)


def test_exact_correlated_rejects_forcing():
    with pytest.raises(ValueError):
        exact_correlated(ModelSpec(B1=1.0), 0.1, 1.0)


# ---------------------------------------------------------------------- negative closed form
def test_exact_negative_initial_value(case2):
    assert exact_negative(case2, 0.1, 0.0) == pytest.approx(0.1)


def test_exact_negative_keeps_the_shape_of_its_times(case2):
    grid = np.linspace(0.0, 6.0, 12).reshape(3, 4)
    values = exact_negative(case2, 0.1, grid)
    assert values.shape == (3, 4)
    assert values[0, 0] == pytest.approx(0.1)
    assert isinstance(exact_negative(case2, 0.1, 2.0), float)


def test_exact_negative_reduces_to_logistic():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=0.0)
    assert exact_negative(spec, 0.1, 50.0) == pytest.approx(10.0, rel=1e-9)


def test_exact_negative_stays_finite_on_long_horizons(case2):
    values = exact_negative(case2, 0.1, np.linspace(0.0, 1000.0, 20001))
    assert np.all(np.isfinite(values))
    assert np.all(values > 0)


def test_exact_negative_blowup_time():
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=10.0, omega=0.1)
    with pytest.raises(DivergenceError) as info:
        exact_negative(spec, 0.1, np.linspace(0.0, 100.0, 1001))
    assert info.value.time == pytest.approx(33.42, abs=0.01)


@pytest.mark.parametrize("N0, omega", [(0.5, 0.1), (1.0, 0.1), (1.0, 1.0), (0.5, 10.0)])
def test_bounded_regime_has_no_blowup(N0, omega):
    spec = ModelSpec(Variant.NEGATIVE_ONLY, B=1.0, C=1.0, K=10.0, N0=N0, omega=omega)
    assert N0 <= math.sqrt(spec.C**2 + omega**2)
    assert negative_blowup_time(spec, 0.1, 1000.0) is None


def test_negative_closed_form_preconditions(case2):
    with pytest.raises(ValueError):
        exact_negative(case2, 0.0, 1.0)
    with pytest.raises(ValueError):
        negative_blowup_time(case2.replace(C=0.0), 0.1, 10.0)


# ---------------------------------------------------------------------- period maximum
@pytest.mark.parametrize("omega, expected", [(1.0, 9.9553), (10.0, 0.2672)])
def test_max_x_closed_form(omega, expected):
    spec = ModelSpec(N0=5.0, omega=omega)
    value = max_x_closed_form(spec, 0.1)
    assert value == pytest.approx(expected, abs=1e-4)
    E = math.exp(2.0 * spec.N0 / omega)
    assert value == pytest.approx(spec.K * 0.1 * E / (spec.K + 0.1 * (E - 1.0)), rel=1e-12)


def test_max_x_saturates_at_low_frequency():
    assert max_x_closed_form(ModelSpec(N0=5.0, omega=0.1), 0.1) == pytest.approx(10.0, rel=1e-6)


def test_max_x_sampled_agrees_with_closed_form(correlated):
    assert max_x_sampled(correlated, 0.1) == pytest.approx(max_x_closed_form(correlated, 0.1), rel=1e-9)


def test_max_x_needs_zero_bias(correlated):
    with pytest.raises(ValueError):
        max_x_closed_form(correlated.replace(B=1.0), 0.1)
