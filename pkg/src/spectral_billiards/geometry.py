"""Billiard tables: boundary queries and exact ray/boundary intersection.

All tables are immutable.  Scalar queries (``intersect_ray``,
``boundary_normal``) work on plain float pairs because they sit in the inner
loop of orbit tracing; ``signed_distance`` is vectorised over ``(..., 2)``
arrays because the Monte-Carlo estimators evaluate it on large batches.

Tolerances scale with the table diameter:

* ``eps_bd = 1e-10 * diam``  -- distance at which a point counts as on the boundary
* ``eps_corner = 1e-9 * diam`` -- distance at which a polygon hit counts as a corner hit
* ``EPS_TAN = 1e-8``          -- |xi . n| below which a hit counts as grazing

Domains serialise to JSON objects ``{"type": ..., <parameters>}``; see
:func:`domain_from_dict`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    CornerHit,
    GrazingHit,
    InvalidDomain,
    NoIntersection,
    NotOnBoundary,
    VertexSingular,
)

EPS_TAN = 1e-8
SCHEMA_VERSION = 1

Vec = tuple[float, float]


class Hit(NamedTuple):
    """First boundary contact of a ray.

    ``normal`` is the unit normal on the side the ray arrives from, so
    ``dot(xi, normal) < 0``; for the outer wall this is the inward normal.
    ``component`` is 0 for the outer wall, 1 for an inner wall; for layered
    media it is the index of the circle that was hit.  ``edge`` is the polygon
    edge index (``None`` for curved tables).
    """

    t: float
    point: Vec
    normal: Vec
    component: int
    edge: int | None = None


@dataclass(frozen=True)
class PhasePoint:
    """Unit-energy phase point: position ``x`` and unit direction ``xi``."""

    x: Vec
    xi: Vec

    def __post_init__(self):
        x = (float(self.x[0]), float(self.x[1]))
        n = math.hypot(self.xi[0], self.xi[1])
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("direction must be a non-zero finite vector")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", (self.xi[0] / n, self.xi[1] / n))

    @classmethod
    def from_angle(cls, x: Sequence[float], angle: float) -> "PhasePoint":
        return cls(tuple(x), (math.cos(angle), math.sin(angle)))


# ---------------------------------------------------------------------------
# small scalar helpers


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _quadratic_roots(A: float, B: float, C: float):
    """Real roots of ``A t^2 + B t + C`` via the cancellation-free formula."""
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return ()
    q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    if q == 0.0:
        return (0.0,)
    return (q / A, C / q)


def _first_positive(roots, eps):
    best = math.inf
    for t in roots:
        if eps < t < best:
            best = t
    return best


def _circle_hit(x, xi, R, eps):
    b = x[0] * xi[0] + x[1] * xi[1]
    c = x[0] * x[0] + x[1] * x[1] - R * R
    return _first_positive(_quadratic_roots(1.0, 2.0 * b, c), eps)


def _ellipse_hit(x, xi, a, b, eps):
    A = xi[0] * xi[0] / (a * a) + xi[1] * xi[1] / (b * b)
    B = 2.0 * (x[0] * xi[0] / (a * a) + x[1] * xi[1] / (b * b))
    C = x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) - 1.0
    return _first_positive(_quadratic_roots(A, B, C), eps)


def _snap_ellipse(p, a, b):
    s = math.sqrt(p[0] * p[0] / (a * a) + p[1] * p[1] / (b * b))
    return (p[0] / s, p[1] / s)


def _ellipse_outward_normal(p, a, b):
    gx, gy = p[0] / (a * a), p[1] / (b * b)
    g = math.hypot(gx, gy)
    return (gx / g, gy / g)


def _facing(n, xi):
    """Orient ``n`` against the incoming direction ``xi``."""
    if _dot(n, xi) > 0.0:
        return (-n[0], -n[1])
    return n


def _check_grazing(n, xi):
    if abs(_dot(n, xi)) < EPS_TAN:
        raise GrazingHit(f"tangential hit, |xi.n| = {abs(_dot(n, xi)):.3e}")


# ---------------------------------------------------------------------------
# vectorised distance kernels


def _ellipse_distance(e0: float, e1: float, y0, y1, iters: int = 120):
    """Euclidean distance from first-quadrant points to the ellipse (e0 >= e1).

    Bisection on the Lagrange-multiplier equation; robust for points inside,
    outside and on the axes.
    """
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    out = np.empty(np.broadcast(y0, y1).shape)
    y0, y1 = np.broadcast_arrays(y0, y1)

    # near-axis points use the axis formulas (error <= 1e-13 e, distance is 1-Lipschitz)
    on_x = y1 <= 1e-13 * e1
    on_y = (y0 <= 1e-13 * e0) & ~on_x
    gen = ~(on_x | on_y)

    if np.any(gen):
        g0, g1 = y0[gen], y1[gen]
        z0, z1 = g0 / e0, g1 / e1
        g = z0 * z0 + z1 * z1 - 1.0
        r0 = (e0 / e1) ** 2
        n0 = r0 * z0
        # bisect on sig = s + 1 so roots near 0 keep relative precision
        lo = z1.copy()
        hi = np.where(g < 0.0, 1.0, np.hypot(n0, z1))
        for _ in range(iters):
            sig = 0.5 * (lo + hi)
            ratio0 = n0 / (sig + (r0 - 1.0))
            ratio1 = z1 / sig
            gg = ratio0 * ratio0 + ratio1 * ratio1 - 1.0
            lo = np.where(gg > 0.0, sig, lo)
            hi = np.where(gg < 0.0, sig, hi)
        sig = np.where(g == 0.0, 1.0, 0.5 * (lo + hi))
        x0 = r0 * g0 / (sig + (r0 - 1.0))
        x1 = g1 / sig
        out[gen] = np.hypot(x0 - g0, x1 - g1)
    if np.any(on_y):
        out[on_y] = np.abs(y1[on_y] - e1)
    if np.any(on_x):
        g0 = y0[on_x]
        denom = e0 * e0 - e1 * e1
        numer = e0 * g0
        inner = numer < denom
        d = np.abs(g0 - e0)
        if np.any(inner):
            xde = numer[inner] / denom
            x0 = e0 * xde
            x1 = e1 * np.sqrt(1.0 - xde * xde)
            d[inner] = np.hypot(x0 - g0[inner], x1)
        out[on_x] = d
    return out


def _signed_ellipse(a, b, pts):
    """Positive inside the ellipse x^2/a^2 + y^2/b^2 < 1."""
    px, py = np.abs(pts[..., 0]), np.abs(pts[..., 1])
    if a >= b:
        d = _ellipse_distance(a, b, px, py)
    else:
        d = _ellipse_distance(b, a, py, px)
    inside = (pts[..., 0] / a) ** 2 + (pts[..., 1] / b) ** 2 < 1.0
    return np.where(inside, d, -d)


def _segment_distance(pts, v0, v1):
    d = v1 - v0
    L2 = float(d @ d)
    w = pts - v0
    s = np.clip((w @ d) / L2, 0.0, 1.0)
    proj = v0 + s[..., None] * d
    return np.hypot(pts[..., 0] - proj[..., 0], pts[..., 1] - proj[..., 1])


def _as_points(x):
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("points must have trailing dimension 2")
    return arr


def _maybe_scalar(val, x):
    return float(val) if np.ndim(x) == 1 else val


# ---------------------------------------------------------------------------
# domains


class Domain:
    """Common interface of all billiard tables."""

    kind: ClassVar[str] = ""

    # -- to be provided by subclasses
    def signed_distance(self, x):
        raise NotImplementedError

    def boundary_normal(self, p: Sequence[float]) -> Vec:
        raise NotImplementedError

    def intersect_ray(self, x: Sequence[float], xi: Sequence[float]) -> Hit:
        raise NotImplementedError

    def metrics(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def diam(self) -> float:
        raise NotImplementedError

    def boundary_point(self, u: float) -> Vec:
        """Point of the outer wall at arc parameter ``u``."""
        raise NotImplementedError

    def boundary_param(self, p: Sequence[float]) -> float:
        """Inverse of :meth:`boundary_point`."""
        raise NotImplementedError

    @property
    def param_period(self) -> float:
        return 2.0 * math.pi

    def bounding_box(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared
    @property
    def eps_bd(self) -> float:
        return 1e-10 * self.diam

    @property
    def eps_corner(self) -> float:
        return 1e-9 * self.diam

    @property
    def is_circular(self) -> bool:
        return False

    def contains(self, x) -> bool:
        return bool(self.signed_distance(np.asarray(x, dtype=float)) > 0.0)


@dataclass(frozen=True)
class Disk(Domain):
    R: float = 1.0
    kind: ClassVar[str] = "disk"

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidDomain("Disk requires R > 0")

    @property
    def diam(self):
        return 2.0 * self.R

    @property
    def is_circular(self):
        return True

    def signed_distance(self, x):
        pts = _as_points(x)
        return _maybe_scalar(self.R - np.hypot(pts[..., 0], pts[..., 1]), pts)

    def boundary_normal(self, p):
        r = math.hypot(p[0], p[1])
        if abs(r - self.R) > self.eps_bd:
            raise NotOnBoundary(f"point at distance {abs(r - self.R):.3e} from the circle")
        return (-p[0] / r, -p[1] / r)

    def intersect_ray(self, x, xi):
        t = _circle_hit(x, xi, self.R, self.eps_bd)
        if not math.isfinite(t):
            raise NoIntersection("ray does not meet the circle")
        p = (x[0] + t * xi[0], x[1] + t * xi[1])
        r = math.hypot(p[0], p[1])
        p = (p[0] * self.R / r, p[1] * self.R / r)
        n = (-p[0] / self.R, -p[1] / self.R)
        _check_grazing(n, xi)
        return Hit(t, p, n, 0)

    def metrics(self):
        return (math.pi * self.R**2, 2.0 * math.pi * self.R)

    def boundary_point(self, u):
        return (self.R * math.cos(u), self.R * math.sin(u))

    def boundary_param(self, p):
        return math.atan2(p[1], p[0]) % (2.0 * math.pi)

    def bounding_box(self):
        return (-self.R, self.R, -self.R, self.R)

    def to_dict(self):
        return {"type": self.kind, "R": self.R}


@dataclass(frozen=True)
class Ellipse(Domain):
    a: float = 2.0
    b: float = 1.0
    kind: ClassVar[str] = "ellipse"

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise InvalidDomain("Ellipse requires a >= b > 0")

    @property
    def c2(self) -> float:
        """Squared focal half-distance."""
        return self.a**2 - self.b**2

    @property
    def diam(self):
        return 2.0 * self.a

    @property
    def is_circular(self):
        return self.a == self.b

    def signed_distance(self, x):
        pts = _as_points(x)
        return _maybe_scalar(_signed_ellipse(self.a, self.b, pts), pts)

    def boundary_normal(self, p):
        F = p[0] ** 2 / self.a**2 + p[1] ** 2 / self.b**2 - 1.0
        grad = 2.0 * math.hypot(p[0] / self.a**2, p[1] / self.b**2)
        if abs(F) / grad > self.eps_bd:
            raise NotOnBoundary(f"point at distance ~{abs(F) / grad:.3e} from the ellipse")
        n = _ellipse_outward_normal(p, self.a, self.b)
        return (-n[0], -n[1])

    def intersect_ray(self, x, xi):
        t = _ellipse_hit(x, xi, self.a, self.b, self.eps_bd)
        if not math.isfinite(t):
            raise NoIntersection("ray does not meet the ellipse")
        p = _snap_ellipse((x[0] + t * xi[0], x[1] + t * xi[1]), self.a, self.b)
        n = _ellipse_outward_normal(p, self.a, self.b)
        n = (-n[0], -n[1])
        _check_grazing(n, xi)
        return Hit(t, p, n, 0)

    def metrics(self):
        a, b = self.a, self.b
        quarter, _ = integrate.quad(
            lambda s: math.sqrt(a * a * math.sin(s) ** 2 + b * b * math.cos(s) ** 2),
            0.0,
            0.5 * math.pi,
            epsabs=0.0,
            epsrel=1e-13,
            limit=200,
        )
        return (math.pi * a * b, 4.0 * quarter)

    def boundary_point(self, u):
        return (self.a * math.cos(u), self.b * math.sin(u))

    def boundary_param(self, p):
        return math.atan2(p[1] / self.b, p[0] / self.a) % (2.0 * math.pi)

    def bounding_box(self):
        return (-self.a, self.a, -self.b, self.b)

    def to_dict(self):
        return {"type": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class CircularAnnulus(Domain):
    R: float = 1.0
    r: float = 0.5
    kind: ClassVar[str] = "circular_annulus"

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise InvalidDomain("CircularAnnulus requires R > r > 0")

    @property
    def diam(self):
        return 2.0 * self.R

    @property
    def is_circular(self):
        return True

    def signed_distance(self, x):
        pts = _as_points(x)
        rho = np.hypot(pts[..., 0], pts[..., 1])
        return _maybe_scalar(np.minimum(self.R - rho, rho - self.r), pts)

    def boundary_normal(self, p):
        rho = math.hypot(p[0], p[1])
        if abs(rho - self.R) <= self.eps_bd:
            return (-p[0] / rho, -p[1] / rho)
        if abs(rho - self.r) <= self.eps_bd:
            return (p[0] / rho, p[1] / rho)
        raise NotOnBoundary("point is on neither circle")

    def intersect_ray(self, x, xi):
        eps = self.eps_bd
        t_out = _circle_hit(x, xi, self.R, eps)
        t_in = _circle_hit(x, xi, self.r, eps)
        if t_in < t_out:
            t, radius, comp = t_in, self.r, 1
        elif math.isfinite(t_out):
            t, radius, comp = t_out, self.R, 0
        else:
            raise NoIntersection("ray does not meet the annulus boundary")
        p = (x[0] + t * xi[0], x[1] + t * xi[1])
        rho = math.hypot(p[0], p[1])
        p = (p[0] * radius / rho, p[1] * radius / rho)
        n = (p[0] / radius, p[1] / radius)
        n = (-n[0], -n[1]) if comp == 0 else n
        _check_grazing(n, xi)
        return Hit(t, p, n, comp)

    def metrics(self):
        return (math.pi * (self.R**2 - self.r**2), 2.0 * math.pi * (self.R + self.r))

    def boundary_point(self, u):
        return (self.R * math.cos(u), self.R * math.sin(u))

    def boundary_param(self, p):
        return math.atan2(p[1], p[0]) % (2.0 * math.pi)

    def bounding_box(self):
        return (-self.R, self.R, -self.R, self.R)

    def to_dict(self):
        return {"type": self.kind, "R": self.R, "r": self.r}


@dataclass(frozen=True)
class ConfocalAnnulus(Domain):
    """Region between two confocal ellipses (outer a2, b2; inner a1, b1)."""

    a2: float = 2.0
    b2: float = math.sqrt(3.0)
    a1: float = 1.25
    b1: float = 0.75
    kind: ClassVar[str] = "confocal_annulus"

    def __post_init__(self):
        if not (self.a2 > self.a1 > self.b1 > 0 and self.a2 > self.b2 > 0):
            raise InvalidDomain("ConfocalAnnulus requires a2 > a1 > b1 > 0 and a2 > b2 > 0")
        c2o = self.a2**2 - self.b2**2
        c2i = self.a1**2 - self.b1**2
        if abs(c2o - c2i) > 1e-9 * self.a2**2:
            raise InvalidDomain("ellipses are not confocal: a2^2-b2^2 != a1^2-b1^2")
        if self.b1 >= self.b2:
            raise InvalidDomain("inner ellipse must lie inside the outer one")

    @property
    def c2(self):
        return self.a2**2 - self.b2**2

    @property
    def diam(self):
        return 2.0 * self.a2

    @property
    def outer(self) -> Ellipse:
        return Ellipse(self.a2, self.b2)

    @property
    def inner(self) -> Ellipse:
        return Ellipse(self.a1, self.b1)

    def signed_distance(self, x):
        pts = _as_points(x)
        d = np.minimum(
            _signed_ellipse(self.a2, self.b2, pts), -_signed_ellipse(self.a1, self.b1, pts)
        )
        return _maybe_scalar(d, pts)

    def boundary_normal(self, p):
        for comp, (a, b, sgn) in enumerate(((self.a2, self.b2, -1.0), (self.a1, self.b1, 1.0))):
            F = p[0] ** 2 / a**2 + p[1] ** 2 / b**2 - 1.0
            grad = 2.0 * math.hypot(p[0] / a**2, p[1] / b**2)
            if abs(F) / grad <= self.eps_bd:
                n = _ellipse_outward_normal(p, a, b)
                return (sgn * n[0], sgn * n[1])
        raise NotOnBoundary("point is on neither ellipse")

    def intersect_ray(self, x, xi):
        eps = self.eps_bd
        t_out = _ellipse_hit(x, xi, self.a2, self.b2, eps)
        t_in = _ellipse_hit(x, xi, self.a1, self.b1, eps)
        if t_in < t_out:
            t, a, b, comp = t_in, self.a1, self.b1, 1
        elif math.isfinite(t_out):
            t, a, b, comp = t_out, self.a2, self.b2, 0
        else:
            raise NoIntersection("ray does not meet the annulus boundary")
        p = _snap_ellipse((x[0] + t * xi[0], x[1] + t * xi[1]), a, b)
        n = _ellipse_outward_normal(p, a, b)
        n = (-n[0], -n[1]) if comp == 0 else n
        _check_grazing(n, xi)
        return Hit(t, p, n, comp)

    def metrics(self):
        A2, P2 = self.outer.metrics()
        A1, P1 = self.inner.metrics()
        return (A2 - A1, P2 + P1)

    def boundary_point(self, u):
        return (self.a2 * math.cos(u), self.b2 * math.sin(u))

    def boundary_param(self, p):
        return math.atan2(p[1] / self.b2, p[0] / self.a2) % (2.0 * math.pi)

    def bounding_box(self):
        return (-self.a2, self.a2, -self.b2, self.b2)

    def to_dict(self):
        return {"type": self.kind, "a2": self.a2, "b2": self.b2, "a1": self.a1, "b1": self.b1}


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 != o2 and o3 != o4


@dataclass(frozen=True)
class Polygon(Domain):
    """Simple counter-clockwise polygon.  Boundary arc parameter is arc length from vertex 0."""

    vertices: tuple = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
    kind: ClassVar[str] = "polygon"

    def __post_init__(self):
        verts = tuple((float(v[0]), float(v[1])) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise InvalidDomain("Polygon needs at least 3 vertices")
        area2 = sum(_cross(verts[i], verts[(i + 1) % n]) for i in range(n))
        if area2 <= 0:
            raise InvalidDomain("Polygon must be counter-clockwise with positive area")
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                    raise InvalidDomain("Polygon is self-intersecting")

    @classmethod
    def rectangle(cls, Lx: float, Ly: float, origin: Vec = (0.0, 0.0)) -> "Polygon":
        x0, y0 = origin
        return cls(((x0, y0), (x0 + Lx, y0), (x0 + Lx, y0 + Ly), (x0, y0 + Ly)))

    @property
    def _edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    @property
    def edge_lengths(self) -> list[float]:
        return [math.hypot(q[0] - p[0], q[1] - p[1]) for p, q in self._edges]

    @property
    def is_convex(self) -> bool:
        v = self.vertices
        n = len(v)
        for i in range(n):
            a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
            if _cross((b[0] - a[0], b[1] - a[1]), (c[0] - b[0], c[1] - b[1])) < 0:
                return False
        return True

    def as_rectangle(self) -> tuple[float, float] | None:
        """(Lx, Ly) if this is an axis-aligned rectangle, else None."""
        v = self.vertices
        if len(v) != 4:
            return None
        xs = sorted({p[0] for p in v})
        ys = sorted({p[1] for p in v})
        if len(xs) != 2 or len(ys) != 2:
            return None
        return (xs[1] - xs[0], ys[1] - ys[0])

    @property
    def diam(self):
        v = self.vertices
        return max(math.hypot(p[0] - q[0], p[1] - q[1]) for p in v for q in v)

    def signed_distance(self, x):
        pts = _as_points(x)
        verts = np.asarray(self.vertices)
        n = len(verts)
        d = np.full(pts.shape[:-1], np.inf)
        inside = np.zeros(pts.shape[:-1], dtype=bool)
        px, py = pts[..., 0], pts[..., 1]
        for i in range(n):
            v0, v1 = verts[i], verts[(i + 1) % n]
            d = np.minimum(d, _segment_distance(pts, v0, v1))
            cond = (v0[1] > py) != (v1[1] > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = v0[0] + (py - v0[1]) * (v1[0] - v0[0]) / (v1[1] - v0[1])
            inside ^= cond & (px < xint)
        return _maybe_scalar(np.where(inside, d, -d), pts)

    def _nearest_edge(self, p):
        best, best_i = math.inf, -1
        for i, (v0, v1) in enumerate(self._edges):
            d = float(_segment_distance(np.asarray(p, float), np.asarray(v0), np.asarray(v1)))
            if d < best:
                best, best_i = d, i
        return best_i, best

    def _edge_inward_normal(self, i):
        (x0, y0), (x1, y1) = self._edges[i]
        L = math.hypot(x1 - x0, y1 - y0)
        return (-(y1 - y0) / L, (x1 - x0) / L)

    def _near_vertex(self, p):
        return any(math.hypot(p[0] - v[0], p[1] - v[1]) <= self.eps_corner for v in self.vertices)

    def boundary_normal(self, p):
        i, d = self._nearest_edge(p)
        if d > self.eps_bd:
            raise NotOnBoundary(f"point at distance {d:.3e} from the polygon")
        if self._near_vertex(p):
            raise VertexSingular("normal undefined at a polygon vertex")
        return self._edge_inward_normal(i)

    def intersect_ray(self, x, xi):
        eps = self.eps_bd
        best_t, best_i = math.inf, -1
        for i, (v0, v1) in enumerate(self._edges):
            d = (v1[0] - v0[0], v1[1] - v0[1])
            denom = _cross(xi, d)
            if denom == 0.0:
                continue
            w = (v0[0] - x[0], v0[1] - x[1])
            t = _cross(w, d) / denom
            s = _cross(w, xi) / denom
            if t > eps and -1e-12 <= s <= 1.0 + 1e-12 and t < best_t:
                best_t, best_i = t, i
        if best_i < 0:
            raise NoIntersection("ray does not meet the polygon")
        p = (x[0] + best_t * xi[0], x[1] + best_t * xi[1])
        if self._near_vertex(p):
            raise CornerHit(f"ray hits a vertex near ({p[0]:.6g}, {p[1]:.6g})")
        n = self._edge_inward_normal(best_i)
        _check_grazing(n, xi)
        return Hit(best_t, p, n, 0, best_i)

    def metrics(self):
        v = self.vertices
        n = len(v)
        area = 0.5 * sum(_cross(v[i], v[(i + 1) % n]) for i in range(n))
        return (area, sum(self.edge_lengths))

    @property
    def param_period(self):
        return sum(self.edge_lengths)

    def boundary_point(self, u):
        u = u % self.param_period
        for (v0, v1), L in zip(self._edges, self.edge_lengths):
            if u <= L:
                s = u / L
                return (v0[0] + s * (v1[0] - v0[0]), v0[1] + s * (v1[1] - v0[1]))
            u -= L
        return self.vertices[0]

    def boundary_param(self, p):
        i, _ = self._nearest_edge(p)
        acc = sum(self.edge_lengths[:i])
        v0 = self._edges[i][0]
        return acc + math.hypot(p[0] - v0[0], p[1] - v0[1])

    def bounding_box(self):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return (min(xs), max(xs), min(ys), max(ys))

    def to_dict(self):
        return {"type": self.kind, "vertices": [list(v) for v in self.vertices]}


@dataclass(frozen=True)
class RadialLayers(Domain):
    """Concentric layers with wave-speed constants.

    ``radii`` is strictly decreasing R0 > R1 > ...; layer k occupies
    R_{k+1} < |x| < R_k.  With ``len(speeds) == len(radii)`` the innermost layer
    is a full disk; with ``len(speeds) == len(radii) - 1`` the innermost circle
    is a reflecting wall.  R0 is always a reflecting wall.
    """

    radii: tuple = (1.0, 0.5)
    speeds: tuple = (1.0, 2.0)
    kind: ClassVar[str] = "radial_layers"

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        speeds = tuple(float(c) for c in self.speeds)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "speeds", speeds)
        if len(radii) < 1 or any(r <= 0 for r in radii):
            raise InvalidDomain("radii must be positive")
        if any(radii[i] <= radii[i + 1] for i in range(len(radii) - 1)):
            raise InvalidDomain("radii must be strictly decreasing")
        if len(speeds) not in (len(radii), len(radii) - 1) or not speeds:
            raise InvalidDomain("need one speed per layer")
        if any(c <= 0 for c in speeds):
            raise InvalidDomain("speeds must be positive")

    @property
    def n_layers(self) -> int:
        return len(self.speeds)

    @property
    def has_hole(self) -> bool:
        return len(self.speeds) == len(self.radii) - 1

    def outer_radius(self, k: int) -> float:
        return self.radii[k]

    def inner_radius(self, k: int) -> float:
        """Inner radius of layer k (0 for a central disk)."""
        return self.radii[k + 1] if k + 1 < len(self.radii) else 0.0

    def layer_of(self, x) -> int:
        rho = math.hypot(x[0], x[1])
        for k in range(self.n_layers):
            if rho >= self.inner_radius(k):
                return k
        return self.n_layers - 1

    @property
    def diam(self):
        return 2.0 * self.radii[0]

    @property
    def is_circular(self):
        return True

    def signed_distance(self, x):
        pts = _as_points(x)
        rho = np.hypot(pts[..., 0], pts[..., 1])
        d = self.radii[0] - rho
        if self.has_hole:
            d = np.minimum(d, rho - self.radii[-1])
        return _maybe_scalar(d, pts)

    def boundary_normal(self, p):
        rho = math.hypot(p[0], p[1])
        if abs(rho - self.radii[0]) <= self.eps_bd:
            return (-p[0] / rho, -p[1] / rho)
        if self.has_hole and abs(rho - self.radii[-1]) <= self.eps_bd:
            return (p[0] / rho, p[1] / rho)
        raise NotOnBoundary("point is not on a wall")

    def intersect_ray(self, x, xi, layer: int | None = None):
        """First contact with any circle bounding the current layer."""
        k = self.layer_of(x) if layer is None else layer
        eps = self.eps_bd
        candidates = [(_circle_hit(x, xi, self.radii[k], eps), k)]
        if k + 1 < len(self.radii):
            candidates.append((_circle_hit(x, xi, self.radii[k + 1], eps), k + 1))
        t, idx = min(candidates)
        if not math.isfinite(t):
            raise NoIntersection("ray does not meet any circle")
        radius = self.radii[idx]
        p = (x[0] + t * xi[0], x[1] + t * xi[1])
        rho = math.hypot(p[0], p[1])
        p = (p[0] * radius / rho, p[1] * radius / rho)
        n = _facing((p[0] / radius, p[1] / radius), xi)
        _check_grazing(n, xi)
        return Hit(t, p, n, idx)

    def metrics(self):
        R0 = self.radii[0]
        if self.has_hole:
            r = self.radii[-1]
            return (math.pi * (R0**2 - r**2), 2.0 * math.pi * (R0 + r))
        return (math.pi * R0**2, 2.0 * math.pi * R0)

    def boundary_point(self, u):
        R = self.radii[0]
        return (R * math.cos(u), R * math.sin(u))

    def boundary_param(self, p):
        return math.atan2(p[1], p[0]) % (2.0 * math.pi)

    def bounding_box(self):
        R = self.radii[0]
        return (-R, R, -R, R)

    def to_dict(self):
        return {"type": self.kind, "radii": list(self.radii), "speeds": list(self.speeds)}


_KINDS = {cls.kind: cls for cls in (Disk, Ellipse, CircularAnnulus, ConfocalAnnulus, Polygon, RadialLayers)}


def domain_from_dict(obj: dict) -> Domain:
    """Build a domain from its JSON object form."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise InvalidDomain("domain JSON must be an object with a 'type' field")
    params = {k: v for k, v in obj.items() if k not in ("type", "schema_version")}
    kind = obj["type"]
    if kind not in _KINDS:
        raise InvalidDomain(f"unknown domain type {kind!r}; expected one of {sorted(_KINDS)}")
    cls = _KINDS[kind]
    try:
        if cls is Polygon:
            return Polygon(tuple(tuple(v) for v in params["vertices"]))
        if cls is RadialLayers:
            return RadialLayers(tuple(params["radii"]), tuple(params["speeds"]))
        return cls(**{k: float(v) for k, v in params.items()})
    except (TypeError, KeyError) as exc:
        raise InvalidDomain(f"bad parameters for {kind}: {exc}") from exc


def domain_to_dict(domain: Domain) -> dict:
    return {"schema_version": SCHEMA_VERSION, **domain.to_dict()}


# ---------------------------------------------------------------------------
# functional interface


def signed_distance(domain: Domain, x):
    """Positive inside, zero on the boundary, negative outside."""
    return domain.signed_distance(x)


def boundary_normal(domain: Domain, p) -> Vec:
    """Inward unit normal at a boundary point."""
    return domain.boundary_normal(p)


def intersect_ray(domain: Domain, x, xi) -> Hit:
    """First boundary contact of the ray ``x + t xi`` with ``t > eps_bd``."""
    return domain.intersect_ray(x, xi)


def metrics(domain: Domain) -> tuple[float, float]:
    """(area, perimeter); perimeter counts every boundary component."""
    return domain.metrics()


def inradius(domain: Domain) -> float:
    """Largest distance from an interior point to the boundary."""
    if isinstance(domain, Disk):
        return domain.R
    if isinstance(domain, Ellipse):
        return domain.b
    if isinstance(domain, CircularAnnulus):
        return 0.5 * (domain.R - domain.r)
    if isinstance(domain, RadialLayers):
        R0 = domain.radii[0]
        return 0.5 * (R0 - domain.radii[-1]) if domain.has_hole else R0
    x0, x1, y0, y1 = domain.bounding_box()
    xs, ys = np.meshgrid(np.linspace(x0, x1, 401), np.linspace(y0, y1, 401))
    d = domain.signed_distance(np.stack([xs, ys], axis=-1))
    return float(d.max())
