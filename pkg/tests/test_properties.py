"""Randomized property checks on the deterministic building blocks."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from intrinsic_metrics.beta import betainc, betainc_upper, cdf_F1
from intrinsic_metrics.geometry import (
    Ball,
    Polytope,
    clip_convex,
    convex_hull_2d,
    disk_polygon_symdiff,
    haar_frames,
    hull_membership,
    polygon_area,
    simplex_volume,
)
from intrinsic_metrics.metrics import MetricConfig, delta_j

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

seeds = st.integers(0, 2**32 - 1)
positive = st.floats(0.05, 50.0)
unit = st.floats(0.0, 1.0)


def random_polygon(seed, k=8, scale=1.5):
    pts = np.random.default_rng(seed).uniform(-scale, scale, (k, 2))
    return convex_hull_2d(pts)


@given(positive, positive, unit)
def test_betainc_halves_sum_to_one(a, b, x):
    lo, hi = betainc(a, b, x), betainc_upper(a, b, x)
    assert 0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0
    assert abs(lo + hi - 1.0) < 1e-12


@given(positive, positive, unit, unit)
def test_betainc_is_monotone(a, b, x, y):
    x, y = sorted((x, y))
    assert betainc(a, b, x) <= betainc(a, b, y) + 1e-15


@given(st.floats(-0.95, 20.0), st.floats(-1.0, 1.0))
def test_one_dimensional_law_is_symmetric(beta, h):
    assert abs(cdf_F1(beta, h) + cdf_F1(beta, -h) - 1.0) < 1e-12


@given(st.integers(1, 6), st.integers(1, 6), seeds)
def test_frames_are_orthonormal(n, j, seed):
    j = min(j, n)
    F = haar_frames(n, j, 5, rng=seed)
    assert np.allclose(np.einsum("mni,mnk->mik", F, F), np.eye(j), atol=1e-10)


@given(seeds, st.integers(1, 4))
def test_simplex_volume_ignores_order_and_translation(seed, d):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((d + 1, 4))
    v = simplex_volume(pts)
    assert math.isclose(simplex_volume(pts[::-1] + rng.standard_normal(4)), v, rel_tol=1e-8, abs_tol=1e-12)


@given(seeds, seeds)
def test_planar_symmetric_difference_identities(s1, s2):
    a, b = random_polygon(s1), random_polygon(s2)
    inter = polygon_area(clip_convex(a, b))
    assert inter <= min(polygon_area(a), polygon_area(b)) + 1e-12
    assert math.isclose(inter, polygon_area(clip_convex(b, a)), rel_tol=1e-9, abs_tol=1e-12)


@given(seeds, st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.2, 2.0))
def test_disk_polygon_symdiff_bounds(seed, cx, cy, r):
    poly = random_polygon(seed)
    d = disk_polygon_symdiff(poly, Ball([cx, cy], r))
    area, disk = polygon_area(poly), math.pi * r * r
    assert abs(area - disk) - 1e-9 <= d <= area + disk + 1e-9


@given(seeds)
def test_convex_combinations_are_members(seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((7, 3))
    w = rng.dirichlet(np.ones(7))
    assert hull_membership(w @ pts, pts)


@settings(max_examples=15)
@given(seeds, seeds, st.integers(1, 3))
def test_metric_is_symmetric_and_vanishes_on_diagonal(s1, s2, j):
    cfg = MetricConfig(subspace_samples=8, volume_samples=200)
    K = Polytope(np.random.default_rng(s1).standard_normal((6, 3)))
    L = Polytope(np.random.default_rng(s2).standard_normal((6, 3)))
    assert delta_j(K, K, j, cfg, rng=1).value == 0.0
    a, b = delta_j(K, L, j, cfg, rng=2).value, delta_j(L, K, j, cfg, rng=2).value
    assert a >= 0 and math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)
