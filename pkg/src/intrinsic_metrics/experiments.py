"""Runnable experiments: scaled sphere polytopes, rate fits, the exact 1-D
baseline, a local best-approximation search and the lemma check suite.

Every replicate draws from its own ``SeedSequence`` spawn key, so results
depend only on the master seed and never on how work is scheduled.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import beta as _beta
from . import constants as _c
from ._random import as_generator, substream
from .errors import DegenerateScalingError, NumericalError, ParameterError
from .estimate import McEstimate, mean_estimate
from .geometry import Polytope, unit_ball
from .metrics import DEFAULT_CONFIG, MetricConfig, delta_j

SCALING_MODES = ("asymptotic", "empirical", "none")
THREADS_ENV = "INTRINSIC_METRICS_THREADS"
EMPIRICAL_REPS = 400


def default_workers():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        k = int(raw)
    except ValueError:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return k


def _map(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- scaling

def empirical_missed_volume(n, N, beta, reps=EMPIRICAL_REPS, rng=None):
    """Estimate of ``E[vol(B_n minus P)]`` for ``N`` beta points.

    Each realization contributes its exact missed volume, so the only
    randomness is the polytope itself.  ``n == 1`` is vectorized.
    """
    rng = as_generator(rng)
    if n == 1:
        out = np.empty(reps)
        chunk = max(1, 2_000_000 // max(N, 1))
        for s in range(0, reps, chunk):
            k = min(chunk, reps - s)
            x = _beta.sample_beta(1, beta, k * N, rng).reshape(k, N)
            out[s:s + k] = 2.0 - (x.max(axis=1) - x.min(axis=1))
        return mean_estimate(out)
    return mean_estimate(_c.missed_volume_samples(n, beta, N, reps, rng))


def scaling_factor_estimate(n, N, beta, mode="asymptotic", rng=None, reps=EMPIRICAL_REPS):
    """Radius ``t`` with its standard error (0 unless ``mode == "empirical"``)."""
    if mode not in SCALING_MODES:
        raise ParameterError(f"scaling mode must be one of {SCALING_MODES}, got {mode!r}")
    if N < n + 1:
        raise ParameterError(f"need N >= n + 1, got n={n}, N={N}")
    if mode == "none":
        return McEstimate(1.0, 0.0, 1)
    if mode == "asymptotic":
        shrink = _c.gamma_ratio(n, beta) * N ** (-2.0 / (n + 2.0 * beta + 1.0))
        if not shrink < 1.0:
            raise DegenerateScalingError("asymptotic scaling is not positive at this N", n=n, N=N, beta=beta, shrink=shrink)
        return McEstimate(1.0 - shrink, 0.0, 1)
    est = empirical_missed_volume(n, N, beta, reps, rng)
    kb = _c.kappa(n)
    if not est.value < kb:
        raise DegenerateScalingError("estimated missed volume fills the ball", n=n, N=N, beta=beta, missed=est.value)
    frac = 1.0 - est.value / kb
    t = frac ** (1.0 / n)
    # delta method: dt/dm = -t / (n * kb * frac)
    return McEstimate(t, t / (n * kb * frac) * est.std_error, est.samples)


def scaling_factor(n, N, beta, mode="asymptotic", rng=None):
    """Radius ``t`` whose annulus ``B_n minus t B_n`` matches the expected missed volume."""
    return scaling_factor_estimate(n, N, beta, mode, rng).value


def construction_beta(n, j):
    """Beta parameter of the scaling used for ``delta_j`` in dimension ``n``."""
    return -1.0 if j == n else 0.5 * (n - j - 2)


def theorem1_scale(n, j, N, mode="asymptotic", rng=None):
    """``(t, flags)`` for the scaled sphere polytope.

    When ``N`` is too small for a positive radius the points are left on the
    sphere (``t = 1``) and the result is flagged ``"unscaled_fallback"``.
    """
    flags = ("extrapolated_scaling",) if j == n else ()
    try:
        return scaling_factor(j, N, construction_beta(n, j), mode, rng), flags
    except DegenerateScalingError:
        return 1.0, flags + ("unscaled_fallback",)


def _check_dims(n, j, N):
    if n < 2:
        raise ParameterError("the scaled sphere construction needs n >= 2")
    if not 1 <= j <= n:
        raise ParameterError(f"need 1 <= j <= n, got n={n}, j={j}")
    if N < n + 1:
        raise ParameterError(f"need N >= n + 1, got n={n}, N={N}")


def theorem1_polytope(n, j, N, rng=None, scaling="asymptotic"):
    """``N`` uniform sphere points pushed out to radius ``1/t``."""
    _check_dims(n, j, N)
    pts_rng, scale_rng = as_generator(rng).spawn(2)
    pts = _beta.sample_sphere(n, N, pts_rng)
    t, _ = theorem1_scale(n, j, N, scaling, scale_rng)
    return Polytope(pts / t)


# ------------------------------------------------------------ rate study

@dataclass(frozen=True)
class ExperimentSpec:
    n: int
    j: int
    N_grid: tuple
    reps: int = 100
    seed: int = 0
    cfg: MetricConfig = DEFAULT_CONFIG
    scaling: str = "asymptotic"

    def __post_init__(self):
        object.__setattr__(self, "N_grid", tuple(int(N) for N in self.N_grid))
        if not self.N_grid:
            raise ParameterError("N_grid is empty")
        for N in self.N_grid:
            _check_dims(self.n, self.j, N)
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        if self.scaling not in SCALING_MODES:
            raise ParameterError(f"scaling must be one of {SCALING_MODES}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    def as_dict(self):
        return {
            "n": self.n, "j": self.j, "N_grid": list(self.N_grid), "reps": self.reps,
            "seed": int(self.seed), "scaling": self.scaling,
            "subspace_samples": self.cfg.subspace_samples, "volume_samples": self.cfg.volume_samples,
            "tol": self.cfg.tol, "exact_low_dim": self.cfg.exact_low_dim,
        }


@dataclass(frozen=True)
class RateRow:
    N: int
    mean: float
    stderr: float
    bound: float
    ratio: float
    scale: float


@dataclass(frozen=True)
class ComparisonRow:
    N: int
    scaled: float
    unscaled: float
    improvement: float
    stderr: float

    @property
    def z(self):
        return self.improvement / self.stderr if self.stderr > 0 else math.inf


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    rows: tuple
    slope: float
    slope_stderr: float
    flags: tuple = ()
    comparison: tuple = field(default=())


def rate_bound(n, j, N):
    """``2 j/(n-1) * V_j(B_n) * N^(-2/(n-1))``."""
    return 2.0 * j / (n - 1) * _c.ball_intrinsic_volume(n, j) * N ** (-2.0 / (n - 1))


def fit_slope(N, mean, stderr):
    """Weighted least-squares slope of ``log mean`` against ``log N``.

    Weights are inverse squared relative errors; zero errors fall back to
    equal weights.  Returns ``(slope, stderr)``.
    """
    x = np.log(np.asarray(N, dtype=float))
    y = np.log(np.asarray(mean, dtype=float))
    if x.size < 3:
        raise ParameterError("a rate fit needs at least 3 grid points")
    rel = np.asarray(stderr, dtype=float) / np.asarray(mean, dtype=float)
    w = 1.0 / rel ** 2 if np.all(rel > 0) else np.ones_like(x)
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    coef = cov @ (X.T @ (w * y))
    if not np.all(rel > 0):
        resid = y - X @ coef
        cov = cov * float(resid @ resid) / max(1, x.size - 2)
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


def _replicate(spec, idx, N, t, compare, rep):
    pts = _beta.sample_sphere(spec.n, N, substream(spec.seed, 0, idx, rep, 0))
    metric_seed = np.random.SeedSequence(int(spec.seed), spawn_key=(0, idx, rep, 1))
    ball = unit_ball(spec.n)
    scaled = delta_j(Polytope(pts / t), ball, spec.j, spec.cfg, metric_seed).value
    if not compare:
        return scaled, math.nan
    return scaled, delta_j(Polytope(pts), ball, spec.j, spec.cfg, metric_seed).value


def theorem1_run(spec, workers=None, compare_unscaled=False):
    """Mean ``delta_j(Q, B_n)`` over replicates for each ``N`` and the fitted rate.

    With ``compare_unscaled`` each replicate also evaluates the inscribed
    polytope on the same points and the same metric stream.
    """
    if len(spec.N_grid) < 3:
        raise ParameterError("a rate fit needs at least 3 grid points")
    workers = default_workers() if workers is None else workers
    rows, comp, flags = [], [], set()
    for idx, N in enumerate(spec.N_grid):
        t, f = theorem1_scale(spec.n, spec.j, N, spec.scaling, substream(spec.seed, 1, idx))
        flags.update(f)
        out = np.array(_map(lambda r: _replicate(spec, idx, N, t, compare_unscaled, r), range(spec.reps), workers))
        est = mean_estimate(out[:, 0])
        bound = rate_bound(spec.n, spec.j, N)
        rows.append(RateRow(N, est.value, est.std_error, bound, est.value / bound, t))
        if compare_unscaled:
            diff = mean_estimate(out[:, 1] - out[:, 0])
            comp.append(ComparisonRow(N, est.value, float(out[:, 1].mean()), diff.value, diff.std_error))
    if any(r.mean <= 0 for r in rows):
        raise NumericalError("non-positive mean distance; cannot fit on a log scale")
    slope, slope_se = fit_slope([r.N for r in rows], [r.mean for r in rows], [r.stderr for r in rows])
    return ExperimentResult(spec, tuple(rows), slope, slope_se, tuple(sorted(flags)), tuple(comp))


def paired_comparison(spec, workers=None):
    """Scaled against inscribed polytope, per ``N``, on common random numbers."""
    workers = default_workers() if workers is None else workers
    out = []
    for idx, N in enumerate(spec.N_grid):
        t, _ = theorem1_scale(spec.n, spec.j, N, spec.scaling, substream(spec.seed, 1, idx))
        vals = np.array(_map(lambda r: _replicate(spec, idx, N, t, True, r), range(spec.reps), workers))
        diff = mean_estimate(vals[:, 1] - vals[:, 0])
        out.append(ComparisonRow(N, float(vals[:, 0].mean()), float(vals[:, 1].mean()), diff.value, diff.std_error))
    return tuple(out)


# ------------------------------------------------------- exact 1-D baseline

def _quad(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, limit=500, epsabs=1e-13, epsrel=1e-12, **kw)
        except integrate.IntegrationWarning as exc:
            raise NumericalError("quadrature did not converge", detail=str(exc)) from None
    return val, err


def appendixB_expectation(N, beta, method="auto", cross_check=True):
    """Expected length of the hull of ``N`` beta points on ``[-1, 1]``.

    Evaluated as ``2 E[max]`` by quadrature of the density of the maximum
    (algebraic endpoint weight).  ``beta == 0`` has the closed form
    ``2(N-1)/(N+1)``, used unless ``method == "quad"``.  The cross-check
    integrates ``1 - F^N - (1-F)^N`` and must agree to ``1e-8``.
    """
    if N < 1 or int(N) != N:
        raise ParameterError(f"N must be a positive integer, got {N}")
    if not beta > -1:
        raise ParameterError(f"beta must be > -1, got {beta}")
    if method not in ("auto", "quad"):
        raise ParameterError("method must be 'auto' or 'quad'")
    N = int(N)
    if N == 1:
        return 0.0
    if beta == 0 and method == "auto":
        return 2.0 * (N - 1) / (N + 1)
    c1 = _beta.normalizer(1, beta)

    def dens_max(s):
        x = 1.0 - s
        return (1.0 - s) * _beta.cdf_F1(beta, x) ** (N - 1)

    # (1 - (1-s)^2)^beta = s^beta (2-s)^beta is the algebraic weight
    val, _ = _quad(dens_max, 0.0, 2.0, weight="alg", wvar=(beta, beta))
    primary = 2.0 * c1 * N * val
    if cross_check:
        def spread(x):
            F = _beta.cdf_F1(beta, x)
            return 1.0 - F ** N - (1.0 - F) ** N

        other, _ = _quad(spread, -1.0, 1.0, points=[0.0])
        if abs(primary - other) > 1e-8:
            raise NumericalError("the two quadrature forms disagree", N=N, beta=beta, primary=primary, other=other)
    return primary


# ------------------------------------------------- best-approximation search

def best_approx_search(n, j, N_vertices, budget, cfg=DEFAULT_CONFIG, rng=None, trace=None):
    """Gaussian-perturbation local search for a polytope close to ``B_n`` in ``delta_j``.

    Starts at the scaled sphere polytope, or at the inscribed polytope on the
    same points when that scores better.  Step ``k`` perturbs every vertex
    by ``sigma_k = 0.2 / sqrt(N) * 0.98^k`` and keeps the candidate only
    when its objective is lower.  The objective uses one fixed metric seed,
    so candidates are compared on common random numbers.  Accepted
    objective values are appended to ``trace`` when it is a list.
    """
    if budget < 0:
        raise ParameterError("budget must be >= 0")
    root = np.random.SeedSequence(as_generator(rng).integers(0, 2**63))
    start_ss, metric_ss, step_ss = root.spawn(3)
    _check_dims(n, j, N_vertices)
    pts_rng, scale_rng = np.random.default_rng(start_ss).spawn(2)
    pts = _beta.sample_sphere(n, N_vertices, pts_rng)
    t, _ = theorem1_scale(n, j, N_vertices, "asymptotic", scale_rng)
    ball = unit_ball(n)

    def objective(P):
        return delta_j(P, ball, j, cfg, metric_ss)

    # at small N the asymptotic radius can overshoot badly; keep the better start
    starts = [Polytope(pts / t), Polytope(pts)]
    vals = [objective(P) for P in starts]
    k0 = int(vals[1].value < vals[0].value)
    best, best_val = starts[k0], vals[k0]
    if trace is not None:
        trace.append(best_val.value)
    steps = np.random.default_rng(step_ss)
    sigma0 = 0.2 / math.sqrt(N_vertices)
    for k in range(budget):
        cand = Polytope(best.vertices + sigma0 * 0.98 ** k * steps.standard_normal(best.vertices.shape))
        val = objective(cand)
        if val.value < best_val.value:
            best, best_val = cand, val
            if trace is not None:
                trace.append(val.value)
    return best, best_val


# ------------------------------------------------------------ lemma suite

@dataclass(frozen=True)
class CheckRow:
    name: str
    params: str
    statistic: float
    threshold: float
    passed: bool
    detail: str = ""


def _z_check(est, exact, k=3.0):
    z = abs(est.value - exact) / est.std_error if est.std_error > 0 else (0.0 if est.value == exact else math.inf)
    return z, k, z <= k


def _registered_checks(samples):
    checks = []
    for n, b in ((2, 0.0), (3, 0.0), (3, 1.0), (3, -1.0)):
        for h in (-0.5, 0.0, 0.3, 0.6, 0.9):
            def run(rng, n=n, b=b, h=h):
                return _z_check(_c.cap_probability_mc(n, b, h, samples, rng), _c.cap_probability(n, b, h))
            checks.append(("cap_probability", f"n={n} beta={b:g} h={h:g}", run))
    for n, b, j in ((3, -1.0, 1), (2, 0.0, 1)):
        def run(rng, n=n, b=b, j=j):
            stat = _beta.projection_law_check(n, b, j, samples, rng)
            crit = _beta.ks_critical_value(samples, 0.01)
            return stat, crit, stat <= crit
        checks.append(("projection_law_ks", f"n={n} beta={b:g} j={j}", run))
    for n, b in ((2, 0.0), (3, 0.0), (2, 1.0)):
        def run(rng, n=n, b=b):
            est = _c.simplex_second_moment_mc(n, b, samples, rng)
            rel = abs(est.value / _c.simplex_second_moment(n, b) - 1.0)
            return rel, 0.02, rel <= 0.02
        checks.append(("simplex_second_moment", f"n={n} beta={b:g}", run))
        for h in (0.0, 0.5):
            def run(rng, n=n, b=b, h=h):
                rel = _c.weighted_slice_moment_check(n, b, h, samples, rng)
                return rel, 0.05, rel <= 0.05
            checks.append(("weighted_slice_moment", f"n={n} beta={b:g} h={h:g}", run))
    for n, b in ((2, 0.0), (3, 0.0), (3, 1.0), (5, -0.5)):
        def run(rng, n=n, b=b):
            ok = all(_c.cap_bounds_check(n, b, r=r) for r in np.linspace(0.01, 0.74, 30))
            return float(ok), 1.0, ok
        checks.append(("cap_sandwich", f"n={n} beta={b:g}", run))

    def chern(rng):
        return _z_check(_c.chern_constant_mc(2, 1, 1, samples, rng), _c.chern_constant(2, 1, 1))
    checks.append(("chern_constant", "n=2 j=1 l=1", chern))
    return checks


def lemma_validation_suite(seed=0, samples=100_000):
    """Run every registered Monte Carlo check; one :class:`CheckRow` each.

    A check that raises is recorded as failed with the error text.
    """
    rows = []
    for i, (name, params, run) in enumerate(_registered_checks(samples)):
        try:
            stat, thr, ok = run(substream(seed, 2, i))
            rows.append(CheckRow(name, params, float(stat), float(thr), bool(ok)))
        except (NumericalError, ParameterError, ArithmeticError, ValueError) as exc:
            rows.append(CheckRow(name, params, math.nan, math.nan, False, f"{type(exc).__name__}: {exc}"))
    return rows


def registered_check_count(samples=100_000):
    return len(_registered_checks(samples))
