"""Intrinsic volumes and the distances built from them.

Everything is a Grassmannian average of a per-subspace quantity.  Frames
come from one child stream and inner Monte Carlo samples from another, so
two calls with the same seed and sample counts see the same subspaces and
the same raw inner draws (common random numbers).

Inner evaluation paths, per projected pair:

* ``j == 1``: intervals from support values (exact);
* ``j == 2``: polygon clipping, polygon against ellipse by an affine map to
  the unit disk, or disk against disk (exact);
* otherwise: radial integration from a common interior point,
  ``vol(A sym B) = vol(B_j) * E_u |rho_A(u)^j - rho_B(u)^j|``, or, when no
  common interior point is found, an XOR indicator over an enclosing ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection, QhullError

from ._random import as_generator, split
from .beta import sample_sphere
from .constants import ball_intrinsic_volume, flag_coefficient
from .errors import ParameterError
from .estimate import McEstimate, mean_estimate
from .geometry import (
    LP_TOL,
    Ball,
    Ellipsoid,
    Polytope,
    affine_dimension,
    ball_volume,
    clip_convex,
    convex_hull_2d,
    disk_disk_intersection_area,
    disk_polygon_symdiff,
    embed,
    haar_frames,
    hull,
    polygon_area,
    polytope_volume,
    project_body,
)

__all__ = [
    "MetricConfig",
    "intrinsic_volume",
    "delta_j",
    "delta_1_support",
    "deviation_Delta_j",
    "deviation_rho_j",
    "embed",
    "polytope_intersection",
]

_RADIAL_CHUNK = 512


@dataclass(frozen=True)
class MetricConfig:
    subspace_samples: int = 400
    volume_samples: int = 2000
    tol: float = LP_TOL
    exact_low_dim: bool = True

    def __post_init__(self):
        if self.subspace_samples < 1 or self.volume_samples < 1:
            raise ParameterError("sample counts must be >= 1")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")


DEFAULT_CONFIG = MetricConfig()


def _check_pair(K, L, j):
    if K.dim != L.dim:
        raise ParameterError(f"bodies live in different dimensions ({K.dim} vs {L.dim})")
    _check_j(K, j)


def _check_j(K, j):
    if not isinstance(K, (Polytope, Ball)):
        raise ParameterError(f"unsupported shape {type(K).__name__}")
    if not 1 <= j <= K.dim:
        raise ParameterError(f"need 1 <= j <= n, got n={K.dim}, j={j}")


def _frames(n, j, m, rng):
    if j == n:
        return np.eye(n)[None]
    return haar_frames(n, j, m, rng)


def _streams(rng):
    return split(rng if rng is not None else np.random.SeedSequence(), 2)


# ------------------------------------------------------- projected shapes

def _interval(shape):
    if isinstance(shape, Polytope):
        x = shape.vertices[:, 0]
        return float(x.min()), float(x.max())
    e = float(np.linalg.norm(shape.L[0])) if not shape.degenerate else 0.0
    return float(shape.center[0] - e), float(shape.center[0] + e)


def projected_volume(shape):
    """j-volume of a projected shape in its own coordinates."""
    if isinstance(shape, Ellipsoid):
        return shape.volume
    return polytope_volume(shape.vertices)


def _planar_symdiff(a, b):
    """Exact area of ``a sym b`` for 2-D shapes, or ``None`` when unsupported."""
    if isinstance(a, Ellipsoid) and isinstance(b, Polytope):
        a, b = b, a
    if isinstance(a, Polytope) and isinstance(b, Polytope):
        pa = convex_hull_2d(a.vertices)
        pb = convex_hull_2d(b.vertices)
        area_a, area_b = polygon_area(pa), polygon_area(pb)
        if area_a <= 0 or area_b <= 0:
            return area_a + area_b
        inter = polygon_area(clip_convex(pa, pb))
        return area_a + area_b - 2.0 * min(max(inter, 0.0), area_a, area_b)
    if isinstance(a, Polytope):
        if b.degenerate:
            return polytope_volume(a.vertices)
        z = np.linalg.solve(b.L, (a.vertices - b.center).T).T
        return abs(np.linalg.det(b.L)) * disk_polygon_symdiff(z, (np.zeros(2), 1.0))
    if a.degenerate or b.degenerate:
        return a.volume + b.volume
    if a.is_disk and b.is_disk:
        r1, r2 = abs(a.L[0, 0]), abs(b.L[0, 0])
        inter = disk_disk_intersection_area(a.center, r1, b.center, r2)
        return math.pi * (r1 * r1 + r2 * r2) - 2.0 * inter
    return None


def _center(shape):
    return shape.vertices.mean(axis=0) if isinstance(shape, Polytope) else shape.center


def _prepare(shape):
    """Attach what radial/XOR evaluation needs: a hull for polytopes."""
    if isinstance(shape, Polytope):
        return shape, hull(shape.vertices)
    return shape, None


def _inside_margin(prep, p):
    shape, h = prep
    if isinstance(shape, Polytope):
        if h is None:
            return -math.inf
        scale = max(1e-300, float(np.abs(h.vertices).max()))
        return h.margin(p) / scale
    if shape.degenerate:
        return -math.inf
    z = np.linalg.solve(shape.L, p - shape.center)
    return 1.0 - float(np.linalg.norm(z))


def _radial(prep, p, U):
    """Radial function from ``p`` along the unit rows of ``U``."""
    shape, h = prep
    if isinstance(shape, Polytope):
        num = h.b - h.A @ p
        out = np.empty(U.shape[0])
        for s in range(0, U.shape[0], _RADIAL_CHUNK):
            den = U[s:s + _RADIAL_CHUNK] @ h.A.T
            with np.errstate(divide="ignore"):
                ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
            out[s:s + _RADIAL_CHUNK] = ratio.min(axis=1)
        return out
    w = np.linalg.solve(shape.L, p - shape.center)
    V = np.linalg.solve(shape.L, U.T).T
    vv = np.einsum("ij,ij->i", V, V)
    wv = V @ w
    disc = wv * wv - vv * (w @ w - 1.0)
    return (-wv + np.sqrt(np.clip(disc, 0.0, None))) / vv


def _contains(prep, Y):
    shape, h = prep
    if isinstance(shape, Polytope):
        return np.zeros(Y.shape[0], bool) if h is None else h.contains(Y)
    return shape.contains(Y)


def _extent(shape, c):
    if isinstance(shape, Polytope):
        return float(np.linalg.norm(shape.vertices - c, axis=1).max())
    return float(np.linalg.norm(shape.center - c)) + float(np.linalg.norm(shape.L, 2))


def _mc_symdiff(a, b, M, rng):
    """``(value, variance)`` of a Monte Carlo symmetric-difference volume."""
    j = a.dim
    pa, pb = _prepare(a), _prepare(b)
    kb = ball_volume(j)
    U = sample_sphere(j, M, rng) if j > 1 else rng.choice([-1.0, 1.0], (M, 1))
    if (isinstance(a, Polytope) and pa[1] is None) or (isinstance(b, Polytope) and pb[1] is None):
        # a flat projection has zero volume; the difference is the other body
        va = projected_volume(a) if pa[1] is not None or isinstance(a, Ellipsoid) else 0.0
        vb = projected_volume(b) if pb[1] is not None or isinstance(b, Ellipsoid) else 0.0
        return va + vb, 0.0
    for p in (_center(b), _center(a), 0.5 * (_center(a) + _center(b))):
        if _inside_margin(pa, p) > 1e-9 and _inside_margin(pb, p) > 1e-9:
            vals = kb * np.abs(_radial(pa, p, U) ** j - _radial(pb, p, U) ** j)
            return float(vals.mean()), float(vals.var(ddof=1) / M) if M > 1 else 0.0
    c = 0.5 * (_center(a) + _center(b))
    R = 1.01 * max(_extent(a, c), _extent(b, c))
    radii = rng.random(M) ** (1.0 / j)
    Y = c + R * U * radii[:, None]
    xor = (_contains(pa, Y) != _contains(pb, Y)).astype(float)
    vol = kb * R ** j
    return vol * float(xor.mean()), vol * vol * float(xor.var(ddof=1)) / M if M > 1 else 0.0


def symdiff_volume(a, b, M, rng, exact=True):
    """``(value, inner variance)`` of ``vol_j(a sym b)`` for projected shapes."""
    j = a.dim
    if exact and j == 1:
        lo1, hi1 = _interval(a)
        lo2, hi2 = _interval(b)
        if max(lo1, lo2) <= min(hi1, hi2):
            return abs(lo1 - lo2) + abs(hi1 - hi2), 0.0
        return (hi1 - lo1) + (hi2 - lo2), 0.0
    if exact and j == 2:
        v = _planar_symdiff(a, b)
        if v is not None:
            return v, 0.0
    return _mc_symdiff(a, b, M, rng)


def _finish(per_subspace, inner_var, coeff, j, n):
    """Scale a per-subspace sample into an estimate of the Grassmannian mean."""
    per_subspace = np.asarray(per_subspace, dtype=float)
    if j == n:
        return McEstimate(coeff * float(per_subspace[0]), coeff * math.sqrt(float(inner_var[0])), 1)
    est = mean_estimate(per_subspace)
    return McEstimate(coeff * est.value, coeff * est.std_error, est.samples)


# ------------------------------------------------------- intrinsic volume

def _flat_volume(vertices, j):
    """j-volume of a polytope whose affine hull has dimension exactly ``j``."""
    centered = vertices - vertices.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    coords = centered @ vt[:j].T
    if j == 1:
        return float(coords.max() - coords.min())
    return polytope_volume(coords)


def intrinsic_volume(K, j, cfg=DEFAULT_CONFIG, rng=None):
    """``V_j(K)`` by Kubota's formula.

    Balls use the closed form.  With ``cfg.exact_low_dim`` a polytope whose
    affine dimension is at most ``j`` is evaluated directly (0 below ``j``,
    its own ``j``-volume at ``j``).  ``j == n`` is the exact volume.
    """
    _check_j(K, j)
    n = K.dim
    if isinstance(K, Ball):
        return McEstimate(ball_intrinsic_volume(K.flat_dim, j, K.radius), 0.0, 1)
    V = K.vertices
    if j == n:
        return McEstimate(polytope_volume(V) if n > 1 else float(V.max() - V.min()), 0.0, 1)
    if cfg.exact_low_dim:
        k = affine_dimension(V)
        if k < j:
            return McEstimate(0.0, 0.0, 1)
        if k == j:
            return McEstimate(_flat_volume(V, j), 0.0, 1)
    frames_rng, _ = _streams(rng)
    frames = _frames(n, j, cfg.subspace_samples, frames_rng)
    coeff = flag_coefficient(n, j)
    if j == 1:
        proj = V @ frames[:, :, 0].T
        vols = proj.max(axis=0) - proj.min(axis=0)
    else:
        vols = np.array([polytope_volume(V @ F) for F in frames])
    return _finish(vols, np.zeros(len(vols)), coeff, j, n)


# --------------------------------------------------------------- metrics

def _delta_samples(bodies_pairs, n, j, cfg, rng):
    """Per-subspace symmetric differences for several pairs on shared frames."""
    frames_rng, inner_rng = _streams(rng)
    frames = _frames(n, j, cfg.subspace_samples, frames_rng)
    inner_seeds = inner_rng.integers(0, 2**63 - 1, size=len(frames))
    out = []
    for K, L in bodies_pairs:
        vals = np.empty(len(frames))
        var = np.empty(len(frames))
        for i, F in enumerate(frames):
            local = np.random.default_rng(int(inner_seeds[i]))
            vals[i], var[i] = symdiff_volume(
                project_body(K, F), project_body(L, F), cfg.volume_samples, local, cfg.exact_low_dim
            )
        out.append((vals, var))
    return out


def delta_j(K, L, j, cfg=DEFAULT_CONFIG, rng=None):
    """Intrinsic volume metric: flag-weighted mean symmetric difference of shadows."""
    _check_pair(K, L, j)
    n = K.dim
    (vals, var), = _delta_samples([(K, L)], n, j, cfg, rng)
    return _finish(vals, var, flag_coefficient(n, j), j, n)


def delta_many(pairs, j, cfg=DEFAULT_CONFIG, rng=None):
    """``delta_j`` for several pairs on common subspace and inner streams."""
    n = pairs[0][0].dim
    for K, L in pairs:
        _check_pair(K, L, j)
        if K.dim != n:
            raise ParameterError("all pairs must share the ambient dimension")
    coeff = flag_coefficient(n, j)
    return [_finish(v, s, coeff, j, n) for v, s in _delta_samples(pairs, n, j, cfg, rng)]


def delta_1_support(K, L, cfg=DEFAULT_CONFIG, rng=None):
    """``2 * flag(n, 1) * E_u |h_K(u) - h_L(u)|`` over uniform directions.

    Valid for intersecting bodies only; the caller guarantees that.
    """
    _check_pair(K, L, 1)
    n = K.dim
    frames_rng, _ = _streams(rng)
    U = sample_sphere(n, cfg.subspace_samples, frames_rng) if n > 1 else np.array([[1.0], [-1.0]])
    vals = np.abs(K.support(U) - L.support(U))
    est = mean_estimate(vals) if n > 1 else McEstimate(float(vals.mean()), 0.0, 2)
    return est * (2.0 * flag_coefficient(n, 1))


# ------------------------------------------------------------ deviations

def polytope_intersection(P, Q):
    """Vertices of ``P cap Q`` as a ``Polytope``, or ``None`` when it has no interior."""
    n = P.dim
    if n == 1:
        lo = max(P.vertices.min(), Q.vertices.min())
        hi = min(P.vertices.max(), Q.vertices.max())
        return Polytope([[lo], [hi]]) if hi > lo else None
    hp, hq = hull(P.vertices), hull(Q.vertices)
    if hp is None or hq is None:
        raise ParameterError("deviations need full-dimensional polytopes")
    A = np.vstack([hp.A, hq.A])
    b = np.concatenate([hp.b, hq.b])
    # Chebyshev centre: maximize s subject to A x + s <= b (rows are unit normals)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([A, np.ones((len(b), 1))]), b_ub=b,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if not res.success or res.x[-1] <= 1e-12:
        return None
    try:
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), res.x[:n])
    except QhullError:
        return None
    return Polytope(hs.intersections)


def _nested_balls(K, L):
    if not (isinstance(K, Ball) and isinstance(L, Ball)) or K.basis is not None or L.basis is not None:
        return None
    small, big = (K, L) if K.radius <= L.radius else (L, K)
    if np.linalg.norm(small.center - big.center) + small.radius <= big.radius:
        return small, big
    return None


def _per_subspace_volumes(polys, n, j, cfg, rng):
    frames_rng, _ = _streams(rng)
    frames = _frames(n, j, cfg.subspace_samples, frames_rng)
    out = []
    for P in polys:
        if P is None:
            out.append(np.zeros(len(frames)))
        elif j == 1:
            proj = P.vertices @ frames[:, :, 0].T
            out.append(proj.max(axis=0) - proj.min(axis=0))
        else:
            out.append(np.array([polytope_volume(P.vertices @ F) for F in frames]))
    return out


def _nested_difference(K, L, j):
    small, big = _nested_balls(K, L)
    n = K.dim
    return McEstimate(ball_intrinsic_volume(n, j, big.radius) - ball_intrinsic_volume(n, j, small.radius), 0.0, 1)


def deviation_Delta_j(P, Q, j, cfg=DEFAULT_CONFIG, rng=None):
    """``V_j(P) + V_j(Q) - 2 V_j(P cap Q)`` on shared subspaces.

    The intersection is computed exactly; an empty intersection is flagged
    ``"empty_intersection"`` and contributes 0.
    """
    _check_pair(P, Q, j)
    if _nested_balls(P, Q) is not None:
        return _nested_difference(P, Q, j)
    if not (isinstance(P, Polytope) and isinstance(Q, Polytope)):
        raise ParameterError("Delta_j is supported for polytope pairs and nested balls only")
    inter = polytope_intersection(P, Q)
    flags = ("empty_intersection",) if inter is None else ()
    vp, vq, vi = _per_subspace_volumes([P, Q, inter], P.dim, j, cfg, rng)
    est = _finish(vp + vq - 2.0 * vi, np.zeros(len(vp)), flag_coefficient(P.dim, j), j, P.dim)
    return McEstimate(est.value, est.std_error, est.samples, flags)


def deviation_rho_j(P, Q, j, cfg=DEFAULT_CONFIG, rng=None):
    """``2 V_j(conv(P cup Q)) - V_j(P) - V_j(Q)`` on shared subspaces."""
    _check_pair(P, Q, j)
    if _nested_balls(P, Q) is not None:
        return _nested_difference(P, Q, j)
    if not (isinstance(P, Polytope) and isinstance(Q, Polytope)):
        raise ParameterError("rho_j is supported for polytope pairs and nested balls only")
    union = Polytope(np.vstack([P.vertices, Q.vertices]))
    vu, vp, vq = _per_subspace_volumes([union, P, Q], P.dim, j, cfg, rng)
    return _finish(2.0 * vu - vp - vq, np.zeros(len(vp)), flag_coefficient(P.dim, j), j, P.dim)
