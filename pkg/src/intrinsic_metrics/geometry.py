"""Deterministic geometric primitives.

Frames are ``(n, j)`` arrays with orthonormal columns; a frame represents a
point of the Grassmannian together with the coordinates used for the
projection onto it.  Bodies are V-polytopes or (possibly flat) Euclidean
balls.  Everything downstream of a projection works with the two projected
shapes defined here: point clouds (``Polytope``) and ``Ellipsoid``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._random import as_generator
from .errors import NumericalError, ParameterError

ORTHO_TOL = 1e-10
LP_TOL = 1e-9
TANGENT_TOL = 1e-12


# ---------------------------------------------------------------- frames

def haar_frames(n, j, m, rng=None):
    """Draw ``m`` Haar-distributed orthonormal frames, shape ``(m, n, j)``.

    QR of a Gaussian matrix with the signs of ``diag(R)`` forced positive;
    the Gaussian law is rotation invariant, so the resulting span is
    exactly Haar distributed on ``Gr(n, j)``.
    """
    if not (1 <= j <= n):
        raise ParameterError(f"need 1 <= j <= n, got n={n}, j={j}")
    g = as_generator(rng).standard_normal((m, n, j))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def haar_subspace(n, j, rng=None):
    """One Haar-distributed frame, shape ``(n, j)``."""
    return haar_frames(n, j, 1, rng)[0]


def check_frame(frame, tol=ORTHO_TOL):
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2 or frame.shape[1] > frame.shape[0] or frame.shape[1] < 1:
        raise ParameterError(f"frame must have shape (n, j) with 1 <= j <= n, got {frame.shape}")
    gram = frame.T @ frame
    if not np.allclose(gram, np.eye(frame.shape[1]), atol=tol, rtol=0):
        raise ParameterError("frame columns are not orthonormal")
    return frame


def project(x, frame):
    """Coordinates of ``x`` (shape ``(..., n)``) in the span of ``frame``."""
    x = np.asarray(x, dtype=float)
    frame = np.asarray(frame, dtype=float)
    if x.shape[-1] != frame.shape[0]:
        raise ParameterError(f"dimension mismatch: point has {x.shape[-1]} coords, frame ambient dim {frame.shape[0]}")
    return x @ frame


def projection_factor(a, b):
    """Product of the cosines of the principal angles between two frames.

    Both frames must span subspaces of equal dimension.
    """
    return abs(np.linalg.det(np.asarray(a).T @ np.asarray(b)))


# ---------------------------------------------------------------- bodies

@dataclass(frozen=True)
class Polytope:
    """Convex hull of a finite vertex list (rows of ``vertices``)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] < 1 or v.size == 0:
            raise ParameterError("a polytope needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise ParameterError("vertices must be finite")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def support(self, u):
        """Support function ``h(u)`` for directions in the rows of ``u``."""
        return (np.atleast_2d(u) @ self.vertices.T).max(axis=-1)


@dataclass(frozen=True)
class Ball:
    """Ball of radius ``radius`` around ``center``.

    With ``basis`` (an ``(n, k)`` orthonormal array) the ball is the flat
    ``k``-dimensional disk ``center + radius * basis @ B_k``.
    """

    center: np.ndarray
    radius: float = 1.0
    basis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ParameterError("ball center must be a finite vector")
        if not self.radius > 0:
            raise ParameterError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.basis is not None:
            b = np.asarray(self.basis, dtype=float)
            if b.ndim != 2 or b.shape[0] != c.size:
                raise ParameterError("basis must have shape (n, k)")
            check_frame(b)
            object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.center.size

    @property
    def flat_dim(self):
        return self.dim if self.basis is None else self.basis.shape[1]

    def support(self, u):
        u = np.atleast_2d(u)
        w = u if self.basis is None else u @ self.basis
        return u @ self.center + self.radius * np.linalg.norm(w, axis=-1)


def unit_ball(n):
    return Ball(np.zeros(n), 1.0)


def body_dim(body):
    return body.dim


def apply_rigid_motion(body, rotation=None, translation=None):
    """Return ``rotation @ body + translation``."""
    n = body.dim
    q = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(n) if translation is None else np.asarray(translation, dtype=float)
    if q.shape != (n, n) or t.shape != (n,):
        raise ParameterError("rotation/translation shapes do not match the body")
    if not np.allclose(q.T @ q, np.eye(n), atol=ORTHO_TOL, rtol=0):
        raise ParameterError("rotation matrix is not orthogonal")
    if isinstance(body, Polytope):
        return Polytope(body.vertices @ q.T + t)
    basis = None if body.basis is None else q @ body.basis
    return Ball(q @ body.center + t, body.radius, basis)


def scale_body(body, s):
    """Dilate about the origin by ``s > 0``."""
    if not s > 0:
        raise ParameterError("scale must be positive")
    if isinstance(body, Polytope):
        return Polytope(body.vertices * s)
    return Ball(body.center * s, body.radius * s, body.basis)


def embed(body, extra_dims):
    """Zero-pad ``body`` into ``R^(n + extra_dims)``.

    A full ball of ``R^n`` becomes a flat ``n``-disk in the larger space.
    """
    if extra_dims < 0:
        raise ParameterError("extra_dims must be >= 0")
    if extra_dims == 0:
        return body
    if isinstance(body, Polytope):
        return Polytope(np.pad(body.vertices, ((0, 0), (0, extra_dims))))
    n = body.dim
    basis = np.eye(n) if body.basis is None else body.basis
    return Ball(np.pad(body.center, (0, extra_dims)), body.radius, np.pad(basis, ((0, extra_dims), (0, 0))))


# ------------------------------------------------------- projected shapes

@dataclass(frozen=True)
class Ellipsoid:
    """``center + L @ B_j``; a disk when ``L`` is a multiple of the identity."""

    center: np.ndarray
    L: np.ndarray
    degenerate: bool = False

    @property
    def dim(self):
        return self.center.size

    @property
    def volume(self):
        if self.degenerate:
            return 0.0
        return abs(np.linalg.det(self.L)) * ball_volume(self.dim)

    @property
    def is_disk(self):
        off = self.L - np.diag(np.diag(self.L))
        d = np.abs(np.diag(self.L))
        return bool(np.allclose(off, 0, atol=1e-12) and np.allclose(d, d[0], rtol=1e-12))

    def support(self, u):
        u = np.atleast_2d(u)
        return u @ self.center + np.linalg.norm(u @ self.L, axis=-1)

    def contains(self, y):
        if self.degenerate:
            return np.zeros(np.atleast_2d(y).shape[0], dtype=bool)
        z = np.linalg.solve(self.L, (np.atleast_2d(y) - self.center).T).T
        return np.einsum("ij,ij->i", z, z) <= 1.0


def project_body(body, frame):
    """Orthogonal projection of ``body`` onto the span of ``frame``."""
    if isinstance(body, Polytope):
        return Polytope(project(body.vertices, frame))
    c = project(body.center, frame)
    if body.basis is None:
        return Ellipsoid(c, body.radius * np.eye(frame.shape[1]))
    m = frame.T @ body.basis
    gram = m @ m.T
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return Ellipsoid(c, np.zeros_like(gram), degenerate=True)
    if np.min(np.diag(chol)) < 1e-12:
        return Ellipsoid(c, np.zeros_like(gram), degenerate=True)
    return Ellipsoid(c, body.radius * chol)


# ---------------------------------------------------------------- volumes

def ball_volume(n):
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


def simplex_volume(pts):
    """``m``-volume of the simplex spanned by ``m + 1`` points in ``R^n``."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    m = pts.shape[0] - 1
    if m > pts.shape[1]:
        raise ParameterError(f"{m + 1} points cannot span an {m}-simplex in R^{pts.shape[1]}")
    if m == 0:
        return 1.0
    g = (pts[1:] - pts[0]).T
    det = np.linalg.det(g.T @ g)
    return math.sqrt(max(det, 0.0)) / math.factorial(m)


def simplex_volumes(pts):
    """Vectorized ``simplex_volume`` over a stack of shape ``(k, m + 1, n)``."""
    pts = np.asarray(pts, dtype=float)
    m = pts.shape[1] - 1
    g = pts[:, 1:, :] - pts[:, :1, :]
    det = np.linalg.det(g @ np.swapaxes(g, 1, 2))
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(m)


def affine_dimension(points, rtol=1e-10):
    points = np.atleast_2d(points)
    if points.shape[0] < 2:
        return 0
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True)
class Hull:
    """H-representation ``A x <= b`` (unit normals) of a full-dimensional hull."""

    A: np.ndarray
    b: np.ndarray
    volume: float
    vertices: np.ndarray

    def contains(self, y, tol=0.0):
        y = np.atleast_2d(y)
        return np.all(y @ self.A.T <= self.b + tol, axis=1)

    def margin(self, p):
        """Distance from ``p`` to the boundary, negative outside."""
        return float(np.min(self.b - self.A @ p))


def hull(points):
    """Qhull-backed hull of ``points``; ``None`` when not full-dimensional."""
    points = np.atleast_2d(points)
    d = points.shape[1]
    if points.shape[0] < d + 1:
        return None
    if d == 1:
        lo, hi = points[:, 0].min(), points[:, 0].max()
        if hi - lo <= 0:
            return None
        return Hull(np.array([[1.0], [-1.0]]), np.array([hi, -lo]), hi - lo, np.array([[lo], [hi]]))
    try:
        h = ConvexHull(points)
    except (QhullError, ValueError):
        return None
    if h.volume <= 0:
        return None
    eq = h.equations
    return Hull(eq[:, :-1], -eq[:, -1], float(h.volume), points[h.vertices])


def polytope_volume(points):
    """Volume of ``conv(points)`` in its ambient dimension; 0 when flat."""
    points = np.atleast_2d(points)
    if points.shape[1] == 2:
        return polygon_area(convex_hull_2d(points))
    h = hull(points)
    return 0.0 if h is None else h.volume


# ------------------------------------------------------- hull membership

def _phase_one(a_eq, b_eq, max_iter):
    """Dense Phase-I simplex with Bland's rule.

    Minimizes the sum of artificial variables for ``a_eq @ x = b_eq, x >= 0``
    and returns that minimum (0 iff feasible, up to round-off).
    """
    m, k = a_eq.shape
    a_eq = a_eq.copy()
    b_eq = b_eq.copy()
    neg = b_eq < 0
    a_eq[neg] *= -1
    b_eq[neg] *= -1
    tab = np.zeros((m + 1, k + m + 1))
    tab[:m, :k] = a_eq
    tab[:m, k:k + m] = np.eye(m)
    tab[:m, -1] = b_eq
    tab[m, :k] = -a_eq.sum(axis=0)
    tab[m, -1] = -b_eq.sum()
    basis = list(range(k, k + m))
    eps = 1e-12
    for it in range(max_iter):
        costs = tab[m, :-1]
        entering = next((c for c in range(k + m) if costs[c] < -eps), None)
        if entering is None:
            return -tab[m, -1]
        col = tab[:m, entering]
        rows = np.nonzero(col > eps)[0]
        if rows.size == 0:
            raise NumericalError("phase-I objective unbounded", iteration=it)
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-14 * max(1.0, abs(best))]
        leave = min(ties, key=lambda r: basis[r])
        tab[leave] /= tab[leave, entering]
        for r in range(m + 1):
            if r != leave and tab[r, entering] != 0.0:
                tab[r] -= tab[r, entering] * tab[leave]
        basis[leave] = entering
    raise NumericalError(
        "phase-I simplex hit its iteration cap",
        iterations=max_iter,
        objective=float(-tab[m, -1]),
        basis=list(basis),
    )


def hull_membership(x, pts, tol=LP_TOL, max_iter=None):
    """True iff ``x`` lies in ``conv(pts)`` up to an L1 residual of ``tol``.

    Decided by feasibility of ``sum(l_i p_i) = x, l >= 0, sum(l) = 1``.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if pts.shape[0] == 0:
        raise ParameterError("pts must be nonempty")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if pts.shape[1] != x.size:
        raise ParameterError("dimension mismatch between x and pts")
    a_eq = np.vstack([pts.T, np.ones(pts.shape[0])])
    b_eq = np.append(x, 1.0)
    if max_iter is None:
        max_iter = 50 * (a_eq.shape[0] + a_eq.shape[1])
    return bool(_phase_one(a_eq, b_eq, max_iter) <= tol)


# ---------------------------------------------------------------- planar

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points):
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def convex_hull_2d(points):
    """Vertices of the planar convex hull in counter-clockwise order."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] > 16:
        try:
            h = ConvexHull(points)
            return points[h.vertices]
        except (QhullError, ValueError):
            pass
    return _monotone_chain(points)


def polygon_area(poly):
    """Signed shoelace area (positive for counter-clockwise order)."""
    poly = np.asarray(poly, dtype=float)
    if poly.shape[0] < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_convex_polygon(x, poly):
    """Exact orientation test against a counter-clockwise convex polygon."""
    poly = np.asarray(poly, dtype=float)
    if poly.shape[0] < 3:
        return False
    a = poly
    b = np.roll(poly, -1, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (x[1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (x[0] - a[:, 0])
    return bool(np.all(cross >= 0))


def clip_convex(subject, clip):
    """Sutherland-Hodgman intersection of two counter-clockwise convex polygons."""
    out = [tuple(p) for p in subject]
    clip = np.asarray(clip, dtype=float)
    k = clip.shape[0]
    if k < 3 or len(out) < 3:
        return np.zeros((0, 2))
    for i in range(k):
        a, b = clip[i], clip[(i + 1) % k]
        ex, ey = b[0] - a[0], b[1] - a[1]
        inp, out = out, []
        if not inp:
            break
        s = inp[-1]
        s_side = ex * (s[1] - a[1]) - ey * (s[0] - a[0])
        for e in inp:
            e_side = ex * (e[1] - a[1]) - ey * (e[0] - a[0])
            if e_side >= 0:
                if s_side < 0:
                    t = s_side / (s_side - e_side)
                    out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
                out.append(e)
            elif s_side >= 0:
                t = s_side / (s_side - e_side)
                out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
            s, s_side = e, e_side
    return np.array(out, dtype=float).reshape(-1, 2)


def disk_polygon_intersection_area(poly, center, radius):
    """Exact area of a convex counter-clockwise polygon intersected with a disk.

    Sums, over edges ``(a, b)``, the signed area of the disk intersected with
    the triangle ``(center, a, b)``: chord pieces inside the disk contribute
    triangles, pieces outside contribute circular sectors.
    """
    poly = np.asarray(poly, dtype=float)
    if poly.shape[0] < 3:
        return 0.0
    r = float(radius)
    a = poly - center
    b = np.roll(a, -1, axis=0)
    d = b - a
    qa = np.einsum("ij,ij->i", d, d)
    qb = 2.0 * np.einsum("ij,ij->i", a, d)
    qc = np.einsum("ij,ij->i", a, a) - r * r
    disc = qb * qb - 4.0 * qa * qc
    # disc / (4 qa) = r^2 - dist^2; |dist - r| < TANGENT_TOL counts as tangent (outside)
    hit = (disc > 8.0 * TANGENT_TOL * qa * r) & (qa > 0)
    sq = np.sqrt(np.where(hit, disc, 0.0))
    safe = np.where(qa > 0, qa, 1.0)
    t1 = np.where(hit, np.clip((-qb - sq) / (2 * safe), 0.0, 1.0), 1.0)
    t2 = np.where(hit, np.clip((-qb + sq) / (2 * safe), 0.0, 1.0), 1.0)
    p1 = a + t1[:, None] * d
    p2 = a + t2[:, None] * d

    def sector(p, q):
        cr = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
        dt = np.einsum("ij,ij->i", p, q)
        return 0.5 * r * r * np.arctan2(cr, dt)

    tri = 0.5 * (p1[:, 0] * p2[:, 1] - p1[:, 1] * p2[:, 0])
    total = sector(a, p1) + tri + sector(p2, b)
    return float(abs(total.sum()))


def disk_disk_intersection_area(c1, r1, c2, r2):
    d = float(np.linalg.norm(np.asarray(c1, float) - np.asarray(c2, float)))
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    x1 = (d * d + r1 * r1 - r2 * r2) / (2 * d * r1)
    x2 = (d * d + r2 * r2 - r1 * r1) / (2 * d * r2)
    a1 = r1 * r1 * math.acos(min(1.0, max(-1.0, x1)))
    a2 = r2 * r2 * math.acos(min(1.0, max(-1.0, x2)))
    k = 0.5 * math.sqrt(max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)))
    return a1 + a2 - k


def disk_polygon_symdiff(poly, disk):
    """Exact area of ``conv(poly)`` symmetric-difference ``disk``.

    ``disk`` is a 2-D ``Ball`` (or ``(center, radius)``); the hull of ``poly``
    is taken first, and an empty or flat polygon yields the disk area.
    """
    if isinstance(disk, Ball):
        center, radius = disk.center, disk.radius
    else:
        center, radius = disk
    center = np.asarray(center, dtype=float)
    poly = np.asarray(poly, dtype=float).reshape(-1, 2)
    disk_area = math.pi * radius * radius
    if poly.shape[0] == 0:
        return disk_area
    h = convex_hull_2d(poly)
    area = polygon_area(h)
    if area <= 0:
        return disk_area
    inter = min(disk_polygon_intersection_area(h, center, radius), area, disk_area)
    return area + disk_area - 2.0 * inter
