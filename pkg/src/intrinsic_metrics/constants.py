"""Closed-form constants, cap measures and moment formulas.

All gamma-heavy expressions are evaluated in log space so the large-``n``
trend checks stay finite.  Each stochastic ``*_mc`` function is an
independent Monte Carlo route to a closed form defined here.
"""
from __future__ import annotations

import math

import numpy as np

from . import beta as _beta
from ._random import as_generator
from .errors import ConsistencyError, ParameterError
from .estimate import mean_estimate
from .geometry import haar_frames, simplex_volumes

IDENTITY_RTOL = 1e-12


def _rel_diff(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------- spheres and balls

def log_omega(p):
    """log of the surface area of ``S^(p-1)``."""
    return math.log(2.0) + 0.5 * p * math.log(math.pi) - math.lgamma(0.5 * p)


def omega(p):
    return math.exp(log_omega(p))


def log_kappa(p):
    """log of the volume of ``B_p`` (``p = 0`` gives 0)."""
    return 0.5 * p * math.log(math.pi) - math.lgamma(0.5 * p + 1.0)


def kappa(p):
    return math.exp(log_kappa(p))


def log_omega_bar(p):
    """log of ``omega_1 * omega_2 * ... * omega_p``; the empty product is 1."""
    return math.fsum(log_omega(k) for k in range(1, p + 1))


# ------------------------------------------------------------ flag/chern

def flag_coefficient(n, j):
    """Flag coefficient: binomial times ball-volume ratio.

    Evaluated both as ``C(n, j) k_n / (k_j k_(n-j))`` and as
    ``omega_(j+1) omega_(n-j+1) / (2 omega_(n+1))``; the two must agree.
    """
    if not 1 <= j <= n:
        raise ParameterError(f"need 1 <= j <= n, got n={n}, j={j}")
    log_binom = math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
    first = math.exp(log_binom + log_kappa(n) - log_kappa(j) - log_kappa(n - j))
    second = 0.5 * math.exp(log_omega(j + 1) + log_omega(n - j + 1) - log_omega(n + 1))
    if _rel_diff(first, second) > IDENTITY_RTOL:
        raise ConsistencyError("flag coefficient forms disagree", n=n, j=j, first=first, second=second)
    return first


def ball_intrinsic_volume(n, j, radius=1.0):
    """``V_j(r B_n) = r^j * flag(n, j) * vol_j(B_j)``; 0 when ``j > n``."""
    if j == 0:
        return 1.0
    if j > n:
        return 0.0
    return radius ** j * flag_coefficient(n, j) * kappa(j)


def chern_constant(n, j, ell):
    """Mean of the ``ell``-th power of the projection factor onto ``R^j``."""
    if not 1 <= j <= n:
        raise ParameterError(f"need 1 <= j <= n, got n={n}, j={j}")
    if ell < 1:
        raise ParameterError("ell must be >= 1")
    lob = log_omega_bar
    return math.exp(
        lob(n + ell) + lob(ell) + lob(j) + lob(n - j)
        - lob(n) - lob(ell + j) - lob(n - j + ell)
    )


def chern_constant_mc(n, j, ell, m, rng=None):
    """Haar average of ``|det(F[:j].T)|^ell`` over ``m`` frames."""
    frames = haar_frames(n, j, m, rng)
    cos_theta = np.abs(np.linalg.det(frames[:, :j, :]))
    return mean_estimate(cos_theta ** ell)


# ------------------------------------------------------------------ caps

def _cap_beta(n, beta):
    if beta < -1:
        raise ParameterError(f"beta must be >= -1, got {beta}")
    return beta + 0.5 * (n - 1)


def cap_probability(n, beta, h):
    """Beta measure of the cap ``{x in B_n : x_n >= h}``."""
    b = _cap_beta(n, beta)
    if b == -1.0:
        # n = 1 sphere: two atoms at +-1
        if h <= -1.0:
            return 1.0
        return 0.5 if h <= 1.0 else 0.0
    return _beta.upper_tail_F1(b, h)


def cap_derivative(n, beta, h):
    """Derivative of :func:`cap_probability` in ``h`` (closed form)."""
    b = _cap_beta(n, beta)
    if b <= -1.0:
        raise ParameterError("cap derivative undefined for the 1-D sphere")
    base = (1.0 - h) * (1.0 + h)
    if base <= 0.0:
        return -math.inf if b < 0 else (0.0 if b > 0 else -_beta.normalizer(1, b))
    return -_beta.normalizer(1, b) * base ** b


def d_const(n, beta):
    """Cap-bound constant, via both of its expressions.

    ``(n + 2 beta + 1) / c_1(beta + (n-1)/2)`` and
    ``2 pi / B(1/2, n/2 + beta + 1)``.  At ``beta = -1`` only the second
    (gamma) form is finite when ``n = 1``; for ``n >= 2`` both are.
    """
    b = _cap_beta(n, beta)
    log_beta_fn = math.lgamma(0.5) + math.lgamma(0.5 * n + beta + 1.0) - math.lgamma(0.5 * n + beta + 1.5)
    second = 2.0 * math.pi * math.exp(-log_beta_fn)
    if b <= -1.0:
        raise ParameterError("d is undefined for n = 1, beta = -1")
    first = (n + 2.0 * beta + 1.0) / _beta.normalizer(1, b)
    if _rel_diff(first, second) > IDENTITY_RTOL:
        raise ConsistencyError("the two d forms disagree", n=n, beta=beta, first=first, second=second)
    return first


def cap_bounds(n, beta, r):
    """``(lower, middle, upper)`` of the cap sandwich at base radius ``r``.

    ``middle = d * v`` with ``v`` the cap probability at height
    ``sqrt(1 - r^2)``.
    """
    if not beta > -1:
        raise ParameterError("the cap sandwich is only asserted for beta > -1")
    if not 0.0 < r < 0.75:
        raise ParameterError(f"cap bounds only hold for r in (0, 3/4), got r={r}")
    h = math.sqrt((1.0 - r) * (1.0 + r))
    b = _cap_beta(n, beta)
    # direct small-cap evaluation keeps tiny r accurate
    v = 0.5 * _beta.betainc(b + 1.0, 0.5, r * r)
    p = n + 2.0 * beta + 1.0
    lower = r ** p
    return lower, d_const(n, beta) * v, lower * (1.0 + r * r)


def cap_bounds_check(n, beta, h=None, r=None):
    """True iff the cap sandwich holds at the given height or base radius."""
    if (h is None) == (r is None):
        raise ParameterError("give exactly one of h or r")
    if r is None:
        r = math.sqrt(max(0.0, (1.0 - h) * (1.0 + h)))
    lo, mid, hi = cap_bounds(n, beta, r)
    slack = 1e-12 * hi
    return lo - slack <= mid <= hi + slack


def cap_probability_mc(n, beta, h, m, rng=None):
    """Fraction of ``m`` beta points whose last coordinate is ``>= h``."""
    x = _beta.sample_beta(n, beta, m, rng)
    return mean_estimate(x[:, -1] >= h)


# ------------------------------------------------------------ Affentranger

def log_affentranger_A(n, beta):
    if n < 1:
        raise ParameterError("n must be >= 1")
    p = n + 2.0 * beta + 1.0
    if not p > 0:
        raise ParameterError(f"need n + 2 beta + 1 > 0, got n={n}, beta={beta}")
    return (
        log_omega(n) - math.log(2.0)
        + math.log(p) - math.log(p + 2.0)
        + math.lgamma(n + 1.0 + 2.0 / p) - math.lgamma(n + 1.0)
        + (2.0 / p) * math.log(d_const(n, beta))
    )


def affentranger_A(n, beta):
    """Limit of ``N^(2/(n+2beta+1)) E[vol(B_n minus P)]`` for beta polytopes."""
    return math.exp(log_affentranger_A(n, beta))


def gamma_ratio(n, beta):
    """``A(n, beta) / omega_n``: leading coefficient of the shrink ``1 - t``."""
    return math.exp(log_affentranger_A(n, beta) - log_omega(n))


# ----------------------------------------------------- simplex moments

def simplex_second_moment(n, beta):
    """``E[vol_(n-1)^2]`` of the simplex on ``n`` beta points in ``B_(n-1)``."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    if not beta > -1:
        raise ParameterError("beta must be > -1")
    return n / (math.factorial(n - 1) * (n + 2.0 * beta + 1.0) ** (n - 1))


def simplex_second_moment_mc(n, beta, m, rng=None):
    pts = _beta.sample_beta(n - 1, beta, m * n, rng).reshape(m, n, n - 1)
    return mean_estimate(simplex_volumes(pts) ** 2)


def slice_normalizer_ratio(n, beta):
    """``c(n, beta) / c(n-1, beta)``, also via its duplication-formula form."""
    direct = math.exp(_beta.log_normalizer(n, beta) - _beta.log_normalizer(n - 1, beta))
    p = n + 2.0 * beta
    dup = math.exp(-p * math.log(2.0) + math.lgamma(p + 1.0) - 2.0 * math.lgamma(0.5 * (p + 1.0)))
    if _rel_diff(direct, dup) > 1e-10:
        raise ConsistencyError("slice normalizer forms disagree", n=n, beta=beta)
    return direct


def weighted_slice_moment(n, beta, h):
    """Closed form of the restricted second moment on the slice at height ``h``."""
    r2 = (1.0 - h) * (1.0 + h)
    expo = n * beta + 0.5 * (n - 1) * (n + 2)
    if r2 <= 0.0:
        return 0.0 if expo > 0 else math.inf
    return slice_normalizer_ratio(n, beta) ** n * r2 ** expo * simplex_second_moment(n, beta)


def weighted_slice_moment_mc(n, beta, h, m, rng=None):
    """Monte Carlo value of the restricted slice moment.

    The beta measure restricted to the slice has total mass
    ``c(n,beta)/c(n-1,beta) * r^(n-1+2beta)`` and, once normalized, is the
    beta-``beta`` law on the ``(n-1)``-ball of radius ``r``.
    """
    if not 0.0 <= h < 1.0:
        raise ParameterError("h must lie in [0, 1)")
    r = math.sqrt((1.0 - h) * (1.0 + h))
    mass = slice_normalizer_ratio(n, beta) * r ** (n - 1 + 2.0 * beta)
    pts = r * _beta.sample_beta(n - 1, beta, m * n, rng).reshape(m, n, n - 1)
    return mean_estimate(simplex_volumes(pts) ** 2 * mass ** n)


def weighted_slice_moment_check(n, beta, h, m, rng=None):
    """Relative error between :func:`weighted_slice_moment_mc` and the closed form."""
    est = weighted_slice_moment_mc(n, beta, h, m, rng)
    exact = weighted_slice_moment(n, beta, h)
    return abs(est.value - exact) / exact


# ----------------------------------------------------- missed volume

def missed_volume_samples(n, beta, N, reps, rng=None):
    """Per-realization ``vol_n(B_n) - vol_n(P)`` for ``reps`` beta polytopes on ``N`` points."""
    from .geometry import polytope_volume

    rng = as_generator(rng)
    kb = math.exp(log_kappa(n))
    out = np.empty(reps)
    for i in range(reps):
        pts = _beta.sample_beta(n, beta, N, rng)
        if n == 1:
            vol = float(pts.max() - pts.min())
        else:
            vol = polytope_volume(pts)
        out[i] = kb - vol
    return out


def affentranger_mc(n, beta, N, reps, rng=None):
    """``N^(2/(n+2beta+1)) * E[missed volume]`` estimated over ``reps`` polytopes."""
    scale = N ** (2.0 / (n + 2.0 * beta + 1.0))
    return mean_estimate(missed_volume_samples(n, beta, N, reps, rng)) * scale


# ------------------------------------------------- large-n trend

def appendix_a_trend(ns, beta=-0.5):
    """Rows ``(n, A/omega_n, |A/omega_n - 1/2| * n / ln(n + 2))``."""
    rows = []
    for n in ns:
        ratio = gamma_ratio(n, beta)
        rows.append((n, ratio, abs(ratio - 0.5) * n / math.log(n + 2.0)))
    return rows

