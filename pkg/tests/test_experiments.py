import math

import numpy as np
import pytest

from intrinsic_metrics.errors import DegenerateScalingError, ParameterError
from intrinsic_metrics.experiments import (
    ExperimentSpec,
    THREADS_ENV,
    appendixB_expectation,
    best_approx_search,
    default_workers,
    fit_slope,
    lemma_validation_suite,
    paired_comparison,
    rate_bound,
    registered_check_count,
    scaling_factor,
    scaling_factor_estimate,
    theorem1_polytope,
    theorem1_run,
    theorem1_scale,
)
from intrinsic_metrics.geometry import Ball, disk_polygon_symdiff, unit_ball
from intrinsic_metrics.metrics import MetricConfig, delta_j

FAST = MetricConfig(subspace_samples=16, volume_samples=400)


# ---------------------------------------------------------------- scaling

@pytest.mark.parametrize("N", [2, 7, 40])
def test_empirical_scaling_one_dimension(N):
    est = scaling_factor_estimate(1, N, 0.0, "empirical", rng=1, reps=40_000)
    assert (1 - est.value) == pytest.approx(2 / (N + 1), abs=3 * est.std_error)


def test_asymptotic_scaling_tends_to_one():
    ts = [scaling_factor(3, N, 0.0) for N in (10, 100, 10_000, 10 ** 8)]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    assert ts[-1] == pytest.approx(1.0, abs=1e-3)


def test_asymptotic_and_empirical_agree_in_the_plane():
    a = 1 - scaling_factor(2, 2000, 0.0, "asymptotic")
    e = 1 - scaling_factor_estimate(2, 2000, 0.0, "empirical", rng=2, reps=300).value
    assert abs(e / a - 1) < 0.15


def test_scaling_errors_and_modes():
    assert scaling_factor(3, 50, 0.0, "none") == 1.0
    with pytest.raises(ParameterError):
        scaling_factor(3, 3, 0.0)
    with pytest.raises(ParameterError):
        scaling_factor(3, 50, 0.0, "bogus")
    with pytest.raises(DegenerateScalingError) as err:
        scaling_factor(2, 3, -1.0)
    assert err.value.diagnostics["N"] == 3


def test_theorem1_scale_flags():
    t, flags = theorem1_scale(3, 3, 100)
    assert 0 < t < 1 and "extrapolated_scaling" in flags
    t, flags = theorem1_scale(2, 2, 3)
    assert t == 1.0 and "unscaled_fallback" in flags


# ------------------------------------------------------------ construction

@pytest.mark.parametrize("n,j", [(3, 1), (3, 3), (4, 2)])
def test_theorem1_polytope_vertices_outside_sphere(n, j):
    P = theorem1_polytope(n, j, 200, rng=3)
    r = np.linalg.norm(P.vertices, axis=1)
    assert np.all(r > 1) and np.allclose(r, r[0])
    assert r[0] == pytest.approx(1 / scaling_factor(j, 200, -1.0 if j == n else (n - j - 2) / 2))


def test_theorem1_polytope_j_equals_n_gives_finite_distance():
    P = theorem1_polytope(3, 3, 100, rng=4)
    est = delta_j(P, unit_ball(3), 3, FAST, rng=5)
    assert math.isfinite(est.value) and est.value > 0


def test_scaled_beats_inscribed_at_500_vertices():
    spec = ExperimentSpec(3, 3, (500,), reps=20, seed=6, cfg=FAST)
    (row,) = paired_comparison(spec, workers=1)
    assert row.improvement > 3 * row.stderr


# -------------------------------------------------------------- rate runs

def test_fit_slope_recovers_power_law():
    N = np.array([50, 100, 200, 400])
    slope, se = fit_slope(N, 3.0 * N ** -0.7, 0.01 * 3.0 * N ** -0.7)
    assert slope == pytest.approx(-0.7, abs=1e-10)
    with pytest.raises(ParameterError):
        fit_slope([1, 2], [1.0, 0.5], [0.1, 0.1])


def test_theorem1_run_contract_and_determinism():
    spec = ExperimentSpec(3, 1, (50, 100, 200), reps=8, seed=7, cfg=FAST)
    a = theorem1_run(spec, workers=1)
    b = theorem1_run(spec, workers=4)
    assert a.rows == b.rows and a.slope == b.slope
    assert len(a.rows) == 3
    for r in a.rows:
        assert r.bound == pytest.approx(rate_bound(3, 1, r.N)) and r.bound > 0 and r.ratio > 0
    assert a.slope < 0


def test_theorem1_run_needs_three_grid_points():
    with pytest.raises(ParameterError):
        theorem1_run(ExperimentSpec(3, 1, (50, 100), reps=2, cfg=FAST))


def test_spec_validation():
    with pytest.raises(ParameterError):
        ExperimentSpec(3, 1, (3, 50, 100))
    with pytest.raises(ParameterError):
        ExperimentSpec(3, 1, (50, 100, 200), reps=0)
    with pytest.raises(ParameterError):
        ExperimentSpec(3, 4, (50, 100, 200))
    with pytest.raises(ParameterError):
        ExperimentSpec(3, 1, (50, 100, 200), scaling="fast")


def test_rate_bound_value():
    # n = 3, j = 1: 2 * (1/2) * V_1(B_3) / N = 4 / N
    assert rate_bound(3, 1, 100) == pytest.approx(0.04)


def test_thread_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ParameterError):
        default_workers()
    monkeypatch.delenv(THREADS_ENV)
    assert default_workers() >= 1


# ----------------------------------------------- exact line case

def test_line_hull_examples():
    assert appendixB_expectation(1, 0.0) == 0.0
    assert appendixB_expectation(3, 0.0) == 1.0
    assert appendixB_expectation(1, 0.7, method="quad") == 0.0


def test_line_hull_quadrature_matches_closed_form():
    for N in list(range(2, 30)) + [50, 100, 200]:
        assert appendixB_expectation(N, 0.0, method="quad") == pytest.approx(2 * (N - 1) / (N + 1), abs=1e-8)


@pytest.mark.parametrize("N,beta,expected", [(3, 0.5, 0.86460743374794898), (10, 1.0, 1.3248559826303213),
                                             (5, -0.5, 1.5890116045692704)])
def test_line_hull_high_precision_oracle(N, beta, expected):
    assert appendixB_expectation(N, beta) == pytest.approx(expected, abs=1e-10)


def test_line_hull_errors():
    with pytest.raises(ParameterError):
        appendixB_expectation(0, 0.0)
    with pytest.raises(ParameterError):
        appendixB_expectation(3, -1.0)


def test_line_hull_matches_simulation():
    rng = np.random.default_rng(8)
    from intrinsic_metrics.beta import sample_beta

    x = sample_beta(1, 2.0, 6 * 50_000, rng).reshape(50_000, 6)
    span = x.max(axis=1) - x.min(axis=1)
    assert abs(span.mean() - appendixB_expectation(6, 2.0)) < 3 * span.std() / math.sqrt(span.size)


# -------------------------------------------------------------- optimizer

def test_optimizer_beats_inscribed_triangle():
    trace = []
    P, est = best_approx_search(2, 2, 3, 1500, rng=9, trace=trace)
    triangle = np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2], [-0.5, -math.sqrt(3) / 2]])
    assert est.value <= disk_polygon_symdiff(triangle, Ball([0.0, 0.0], 1.0))
    assert est.value == pytest.approx(disk_polygon_symdiff(P.vertices, Ball([0.0, 0.0], 1.0)), rel=1e-12)


def test_optimizer_zero_budget_returns_start():
    trace = []
    P0, e0 = best_approx_search(3, 2, 12, 0, FAST, rng=10, trace=trace)
    P1, e1 = best_approx_search(3, 2, 12, 25, FAST, rng=10)
    assert len(trace) == 1 and trace[0] == e0.value
    assert e1.value <= e0.value


def test_optimizer_trace_is_monotone():
    trace = []
    best_approx_search(2, 1, 6, 200, FAST, rng=11, trace=trace)
    assert all(b < a for a, b in zip(trace, trace[1:]))
    with pytest.raises(ParameterError):
        best_approx_search(2, 1, 6, -1)


# ------------------------------------------------------------ lemma suite

def test_lemma_suite_passes_and_is_deterministic():
    a = lemma_validation_suite(0, samples=100_000)
    assert len(a) == registered_check_count()
    failed = [r for r in a if not r.passed]
    assert not failed, failed
    assert lemma_validation_suite(0, samples=100_000) == a


def test_lemma_suite_tiny_sample_still_reports_every_row():
    rows = lemma_validation_suite(1, samples=1)
    assert len(rows) == registered_check_count()
