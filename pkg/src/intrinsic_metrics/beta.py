"""Beta distributions on the unit ball.

The density on ``B_n`` is ``c(n, beta) * (1 - |x|^2)^beta``.  ``beta = -1``
is never evaluated as a density; it is the sphere limit and is handled by
:func:`sample_sphere` and the ``SPHERE`` marker.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._random import as_generator
from .errors import NumericalError, ParameterError

SPHERE = -1.0

_CF_TOL = 1e-14
_CF_MAXITER = 10_000
_TINY = 1e-300


@dataclass(frozen=True)
class BetaParams:
    n: int
    beta: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.n}")
        if self.beta < -1:
            raise ParameterError(f"beta must be >= -1, got {self.beta}")

    @property
    def is_sphere(self):
        return self.beta == SPHERE


def log_normalizer(n, beta):
    if not beta > -1:
        raise ParameterError(f"density needs beta > -1, got {beta}")
    return math.lgamma(0.5 * n + beta + 1.0) - 0.5 * n * math.log(math.pi) - math.lgamma(beta + 1.0)


def normalizer(n, beta):
    """Normalizing constant of the beta density on ``B_n``."""
    return math.exp(log_normalizer(n, beta))


def density(x, n, beta):
    x = np.atleast_2d(x)
    s = 1.0 - np.einsum("ij,ij->i", x, x)
    out = np.zeros(x.shape[0])
    inside = s > 0
    out[inside] = normalizer(n, beta) * s[inside] ** beta
    return out


# ----------------------------------------------------------- samplers

def sample_sphere(n, size=None, rng=None):
    """Uniform points on ``S^(n-1)`` (normalized Gaussians)."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = as_generator(rng)
    shape = (1 if size is None else size, n)
    g = rng.standard_normal(shape)
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    u = g / norms[:, None]
    return u[0] if size is None else u


def sample_beta(n, beta, size=None, rng=None):
    """Points with the beta-``beta`` law on ``B_n``.

    Radial construction: uniform direction times ``sqrt(S)`` with
    ``S ~ Beta(n/2, beta + 1)`` built from two Gamma variates.
    ``beta = -1`` returns sphere points.
    """
    if beta == SPHERE:
        return sample_sphere(n, size, rng)
    if not beta > -1:
        raise ParameterError(f"beta must be > -1 (or exactly -1 for the sphere), got {beta}")
    rng = as_generator(rng)
    k = 1 if size is None else size
    u = sample_sphere(n, k, rng)
    ga = rng.standard_gamma(0.5 * n, k)
    gb = rng.standard_gamma(beta + 1.0, k)
    total = ga + gb
    s = np.where(total > 0, ga / np.where(total > 0, total, 1.0), 0.0)
    x = u * np.sqrt(s)[:, None]
    # near the sphere (beta close to -1) a real fraction of the mass sits
    # closer to it than a double can resolve; pull those points just inside
    over = np.einsum("ij,ij->i", x, x) >= 1.0
    while np.any(over):
        # a factor of 1 - 2^-50 moves every nonzero coordinate by at least one ulp
        x[over] *= 1.0 - 2.0 ** -50
        over = np.einsum("ij,ij->i", x, x) >= 1.0
    return x[0] if size is None else x


# --------------------------------------------- regularized incomplete beta

def _beta_cf(a, b, x):
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise NumericalError("incomplete beta continued fraction did not converge", a=a, b=b, x=x)


def _betainc_pair(a, b, x):
    """``(I_x(a, b), 1 - I_x(a, b))``, each from the branch that keeps it accurate."""
    if a <= 0 or b <= 0:
        raise ParameterError(f"betainc needs a, b > 0, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0, 1.0
    if x >= 1.0:
        return 1.0, 0.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fast left of the mean; use symmetry on the right
    if x < (a + 1.0) / (a + b + 2.0):
        lo = front * _beta_cf(a, b, x) / a
        return lo, 1.0 - lo
    hi = front * _beta_cf(b, a, 1.0 - x) / b
    return 1.0 - hi, hi


def betainc(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)`` for scalar input."""
    return _betainc_pair(a, b, x)[0]


def betainc_upper(a, b, x):
    """``1 - I_x(a, b)`` without cancellation."""
    return _betainc_pair(a, b, x)[1]


def beta_cdf(s, a, b):
    """Vectorized ``Beta(a, b)`` CDF built on :func:`betainc`."""
    s = np.asarray(s, dtype=float)
    return np.vectorize(lambda v: betainc(a, b, v), otypes=[float])(s)


# ------------------------------------------------- one-dimensional law

def _clamp_h(h):
    if h < -1.0 or h > 1.0:
        warnings.warn(f"h={h} outside [-1, 1]; clamped", RuntimeWarning, stacklevel=3)
        return min(1.0, max(-1.0, h))
    return h


def upper_tail_F1(beta, h):
    """``1 - F1(beta, h)``: mass of the one-dimensional beta law above ``h``."""
    if not beta > -1:
        raise ParameterError(f"F1 needs beta > -1, got {beta}")
    h = _clamp_h(float(h))
    if h >= 1.0:
        return 0.0
    if h <= -1.0:
        return 1.0
    r2 = (1.0 - h) * (1.0 + h)
    cap = 0.5 * betainc(beta + 1.0, 0.5, r2)
    return cap if h >= 0 else 1.0 - cap


def cdf_F1(beta, h):
    """CDF of the one-dimensional beta-``beta`` law on ``[-1, 1]``."""
    if not beta > -1:
        raise ParameterError(f"F1 needs beta > -1, got {beta}")
    h = _clamp_h(float(h))
    if h >= 1.0:
        return 1.0
    if h <= -1.0:
        return 0.0
    if h < 0:
        return upper_tail_F1(beta, -h)
    return 1.0 - upper_tail_F1(beta, h)


def density_F1(beta, h):
    return normalizer(1, beta) * max(0.0, 1.0 - h * h) ** beta


def inverse_cdf_F1(beta, p, tol=1e-12, max_iter=200):
    """Solve ``cdf_F1(beta, h) = p`` by Newton steps kept inside a bisection bracket."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return -1.0
    if p == 1.0:
        return 1.0
    if p == 0.5:
        return 0.0
    # solve on the right half for the smaller tail so tiny p keep full precision
    sign, q = (-1.0, p) if p < 0.5 else (1.0, 1.0 - p)
    lo, hi = 0.0, 1.0
    h = 0.5
    for _ in range(max_iter):
        resid = upper_tail_F1(beta, h) - q
        if resid > 0:
            lo = h
        else:
            hi = h
        dens = density_F1(beta, h)
        step = h + resid / dens if dens > 0 else None
        h_new = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if abs(h_new - h) < tol or hi - lo < tol:
            return sign * h_new
        h = h_new
    raise NumericalError("inverse F1 did not converge", beta=beta, p=p, bracket=(lo, hi))


# ------------------------------------------------------ projection law

def ks_critical_value(m, alpha=0.01):
    """One-sample two-sided KS critical value at level ``alpha``."""
    return float(stats.kstwo.ppf(1.0 - alpha, m))


def ks_statistic(samples, cdf):
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def projected_radius_law(n, beta, j):
    """``(a, b)`` of the Beta law of ``|X|L|^2`` for ``X`` beta-``beta`` on ``B_n``."""
    return 0.5 * j, beta + 0.5 * (n - j) + 1.0


def projection_law_check(n, beta, j, m, rng=None):
    """KS distance between projected squared radii and their predicted law.

    Samples ``m`` points of the beta-``beta`` law on ``B_n`` (sphere when
    ``beta == -1``), keeps the first ``j`` coordinates and compares the
    squared norms with ``Beta(j/2, beta + (n - j)/2 + 1)``.  When that
    second parameter is 0 (sphere with ``j == n``) the law is a point mass
    at 1.
    """
    if not 1 <= j <= n:
        raise ParameterError(f"need 1 <= j <= n, got n={n}, j={j}")
    x = sample_beta(n, beta, m, rng)
    s = np.einsum("ij,ij->i", x[:, :j], x[:, :j])
    a, b = projected_radius_law(n, beta, j)
    if b <= 0:
        # point mass at 1: sup distance between the two CDFs is the stray mass
        return float(np.mean(np.abs(s - 1.0) > 1e-9))
    return ks_statistic(s, lambda v: beta_cdf(v, a, b))
