"""Logistic closed form and the two-stage parameter recovery."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from dishsim.errors import ConfigError, ConvergenceError
from dishsim.fitting import (DEFAULT_SATURATION, FitResult,
                             ProliferationSeries, fit_growth, fit_mortality,
                             logistic_solution)
from dishsim.rng import Xoshiro256StarStar


def series_from(growth, quadratic, mortality=0.0, step=0.5, initial=1.0):
    t = np.arange(0.0, 6.0 + 1e-9, step)
    return ProliferationSeries(
        t, logistic_solution(t, initial, growth, quadratic, mortality))


def rk4_population(initial, growth, quadratic, mortality, t_end, dt=1e-4):
    """Scalar RK4 on u' = u*((growth - mortality) - quadratic*u)."""
    rate = growth - mortality

    def f(u):
        return u * (rate - quadratic * u)

    u = initial
    steps = int(round(t_end / dt))
    for _ in range(steps):
        k1 = f(u)
        k2 = f(u + 0.5 * dt * k1)
        k3 = f(u + 0.5 * dt * k2)
        k4 = f(u + dt * k3)
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


# -- closed form -----------------------------------------------------------

def test_solution_starts_at_the_initial_count():
    assert logistic_solution(0.0, 3.7, 0.642, 0.005) == pytest.approx(3.7)


def test_solution_levels_off_at_the_carrying_capacity():
    # plateau = rate / quadratic, reached from either side
    val = logistic_solution(1e4, 1.0, 0.642, 0.005)
    assert val == pytest.approx(0.642 / 0.005, rel=1e-12)
    val = logistic_solution(1e4, 500.0, 0.642, 0.005)
    assert val == pytest.approx(0.642 / 0.005, rel=1e-12)


def test_solution_without_self_limitation_is_exponential():
    val = logistic_solution(1.0, 2.0, 1.0, 0.0)
    assert val == pytest.approx(2.0 * math.e, rel=1e-14)


def test_declining_population_stays_finite_at_large_times():
    # net rate -1: the stable branch must underflow to 0, not overflow
    val = logistic_solution(1e4, 5.0, 0.5, 0.01, mortality=1.5)
    assert val == 0.0


def test_zero_rate_branch_matches_the_neighboring_rates():
    exact = logistic_solution(2.0, 4.0, 1.0, 0.03, mortality=1.0)
    assert exact == pytest.approx(4.0 / (1.0 + 0.03 * 4.0 * 2.0), rel=1e-15)
    near = logistic_solution(2.0, 4.0, 1.0 + 1e-9, 0.03, mortality=1.0)
    assert near == pytest.approx(exact, rel=1e-7)


def test_solution_matches_rk4_at_the_reference_point():
    closed = logistic_solution(6.0, 1.0, 0.6420, 0.0050)
    assert abs(closed - rk4_population(1.0, 0.6420, 0.0050, 0.0, 6.0)) < 1e-8


def test_solution_matches_rk4_across_a_seeded_parameter_sweep():
    rng = Xoshiro256StarStar(11)
    for _ in range(6):
        growth = 0.1 + 1.9 * rng.random()
        mortality = (growth + 1.0) * rng.random()
        quadratic = 0.05 * rng.random()
        initial = 0.5 + 4.5 * rng.random()
        closed = logistic_solution(3.0, initial, growth, quadratic, mortality)
        stepped = rk4_population(initial, growth, quadratic, mortality, 3.0)
        assert abs(closed - stepped) < 1e-8


def test_solution_validates_inputs():
    with pytest.raises(ConfigError):
        logistic_solution(1.0, 0.0, 0.5, 0.01)
    with pytest.raises(ConfigError):
        logistic_solution(1.0, 1.0, -0.5, 0.01)
    with pytest.raises(ConfigError):
        logistic_solution(1.0, 1.0, 0.5, -0.01)


# -- series ----------------------------------------------------------------

def test_series_validation():
    with pytest.raises(ConfigError):
        ProliferationSeries(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ConfigError):
        ProliferationSeries(np.array([0.5, 1.0, 2.0]), np.ones(3))
    with pytest.raises(ConfigError):
        ProliferationSeries(np.array([0.0, 2.0, 1.0]), np.ones(3))
    with pytest.raises(ConfigError):
        ProliferationSeries(np.array([0.0, 1.0, 2.0]),
                            np.array([1.0, 0.0, 2.0]))


def test_series_csv_round_trip(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_text("t,count\n0.0,1.0\n0.5,1.38\n1.0,1.9\n")
    s = ProliferationSeries.from_csv(path)
    assert s.times.tolist() == [0.0, 0.5, 1.0]
    assert s.counts.tolist() == [1.0, 1.38, 1.9]
    assert s.initial == 1.0


def test_series_csv_rejects_bad_input(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("time,n\n0.0,1.0\n")
    with pytest.raises(ConfigError):
        ProliferationSeries.from_csv(bad_header)
    bad_field = tmp_path / "f.csv"
    bad_field.write_text("t,count\n0.0,1.0\n0.5,abc\n1.0,2.0\n")
    with pytest.raises(ConfigError):
        ProliferationSeries.from_csv(bad_field)
    with pytest.raises(ConfigError):
        ProliferationSeries.from_csv(tmp_path / "missing.csv")


# -- growth fitting --------------------------------------------------------

def test_growth_round_trip_noiseless():
    for target in (0.6420, 0.6359):
        res = fit_growth(series_from(target, target / DEFAULT_SATURATION))
        assert abs(res.growth - target) < 1e-6
        assert res.quadratic == pytest.approx(res.growth / DEFAULT_SATURATION)
        assert res.mortality == 0.0
        assert res.rss < 1e-15


def test_growth_fit_is_scale_equivariant():
    base = series_from(0.6420, 0.6420 / DEFAULT_SATURATION)
    doubled = ProliferationSeries(base.times, 2.0 * base.counts)
    a = fit_growth(base, saturation=DEFAULT_SATURATION)
    b = fit_growth(doubled, saturation=2.0 * DEFAULT_SATURATION)
    assert b.growth == pytest.approx(a.growth, rel=1e-8)


def test_growth_fit_is_deterministic():
    s = series_from(0.9, 0.9 / DEFAULT_SATURATION)
    assert fit_growth(s) == fit_growth(s)


def test_growth_fit_requires_saturation_above_the_counts():
    s = series_from(0.6420, 0.6420 / DEFAULT_SATURATION)
    with pytest.raises(ConfigError):
        fit_growth(s, saturation=float(np.max(s.counts)))


def test_growth_fit_rejects_a_pinned_bracket():
    # counts that grow like exp(8t) want a rate far beyond the bracket
    t = np.arange(0.0, 6.0 + 1e-9, 0.5)
    runaway = ProliferationSeries(t, np.exp(8.0 * t))
    with pytest.raises(ConvergenceError):
        fit_growth(runaway, saturation=1e30)


# -- mortality fitting -----------------------------------------------------

def test_mortality_round_trip_noiseless():
    base = 0.6420
    quad = base / DEFAULT_SATURATION
    for target in (0.6619, 0.2192, 1.9545):
        res = fit_mortality(series_from(base, quad, target), base, quad)
        assert abs(res.mortality - target) < 1e-6
        assert res.growth == base


def test_mortality_of_an_untreated_series_is_exactly_zero():
    base = 0.6420
    quad = base / DEFAULT_SATURATION
    res = fit_mortality(series_from(base, quad, 0.0), base, quad)
    assert res.mortality == 0.0


def test_mortality_fit_rejects_a_pinned_bracket():
    t = np.arange(0.0, 6.0 + 1e-9, 0.5)
    crash = ProliferationSeries(t, np.exp(-10.0 * t) + 1e-30)
    with pytest.raises(ConvergenceError):
        fit_mortality(crash, 0.6420, 0.005)


# -- the two-stage protocol under measurement noise ------------------------

def test_two_stage_recovery_with_one_percent_noise():
    t = np.arange(0.0, 6.0 + 1e-9, 0.05)
    growth_true, death_true = 0.6420, 0.6619
    quad_true = growth_true / DEFAULT_SATURATION
    clean_g = logistic_solution(t, 1.0, growth_true, quad_true)
    clean_m = logistic_solution(t, 1.0, growth_true, quad_true, death_true)
    rng = Xoshiro256StarStar(0)
    # the plating count at t=0 is protocol-exact; later counts carry noise
    noisy_g = clean_g * np.array([1.0] + [1.0 + 0.01 * rng.normal()
                                         for _ in t[1:]])
    noisy_m = clean_m * np.array([1.0] + [1.0 + 0.01 * rng.normal()
                                         for _ in t[1:]])
    stage1 = fit_growth(ProliferationSeries(t, noisy_g))
    stage2 = fit_mortality(ProliferationSeries(t, noisy_m),
                           stage1.growth, stage1.quadratic)
    assert abs(stage1.growth - growth_true) < 5e-4
    assert abs(stage2.mortality - death_true) < 5e-4


def test_fit_result_is_a_plain_record():
    r = FitResult(0.6, 0.005, 0.1, 1e-4)
    assert (r.growth, r.quadratic, r.mortality, r.rss) == (0.6, 0.005, 0.1, 1e-4)


# -- shipped data fixtures --------------------------------------------------

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "proliferation"


def test_shipped_series_recover_their_generators():
    sensitive = fit_growth(
        ProliferationSeries.from_csv(FIXTURES / "species1_untreated.csv"))
    resistant = fit_growth(
        ProliferationSeries.from_csv(FIXTURES / "species2_untreated.csv"))
    assert sensitive.growth == pytest.approx(0.6420, abs=1e-6)
    assert resistant.growth == pytest.approx(0.6359, abs=1e-6)

    treated = ProliferationSeries.from_csv(FIXTURES / "species1_dose_0.1.csv")
    stage2 = fit_mortality(treated, sensitive.growth, sensitive.quadratic)
    assert stage2.mortality == pytest.approx(0.6619, abs=1e-6)

    unaffected = ProliferationSeries.from_csv(
        FIXTURES / "species2_dose_0.3.csv")
    assert fit_mortality(unaffected, resistant.growth,
                         resistant.quadratic).mortality == 0.0
