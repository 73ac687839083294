"""Billiard flow, boundary map, reflection and refraction, conserved quantities.

Flows run at unit speed on ``|xi| = 1``.  A :class:`BoundaryState` holds the
outgoing direction right after a wall contact.  Boundary coordinates are
``(u, v)`` with ``u`` the arc parameter of :meth:`Domain.boundary_point` and
``v`` the polar angle of ``xi``.

The normal-momentum coordinate ``eta`` depends on the table:

* conics: ``x1 xi1 / a^2 + x2 xi2 / b^2`` (``x . xi / R^2`` on circles), so the
  invariant measure of the boundary map is ``|eta| du dv`` up to the constant
  ``a b`` that is not included;
* polygons: ``xi . n`` with ``n`` the inward edge normal and ``u`` arc length;
* layered media: ``c_k (x ^ xi)``, the quantity preserved by Snell refraction.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    CornerHit,
    ExceptionalSet,
    GrazingHit,
    NoIntersection,
    NumericRangeError,
    WrongDomain,
)
from .geometry import (
    EPS_TAN,
    CircularAnnulus,
    ConfocalAnnulus,
    Disk,
    Domain,
    Ellipse,
    PhasePoint,
    Polygon,
    RadialLayers,
    Vec,
    _cross,
    _dot,
)


class Termination(str, enum.Enum):
    COMPLETED = "Completed"
    CORNER = "Corner"
    GRAZING = "Grazing"
    ESCAPED = "Escaped"


class CausticClass(str, enum.Enum):
    CONFOCAL_ELLIPSE = "ConfocalEllipse"
    CONFOCAL_HYPERBOLA = "ConfocalHyperbola"
    THROUGH_FOCI = "ThroughFoci"


class BranchPolicy(str, enum.Enum):
    REFLECT = "reflect"
    REFRACT = "refract"
    BOTH = "both"


@dataclass(frozen=True)
class BoundaryState:
    """State on a boundary or interface after the contact.

    ``component`` is the index of the wall or circle that was touched and
    ``layer`` the medium the outgoing ray travels in (0 for homogeneous tables).
    """

    p: Vec
    u: float
    xi: Vec
    eta: float
    component: int = 0
    layer: int = 0

    def phase_point(self) -> PhasePoint:
        return PhasePoint(self.p, self.xi)


@dataclass
class OrbitRecord:
    """Segments ``(start, end, layer)`` of a traced orbit and its bounce states."""

    segments: list = field(default_factory=list)
    bounces: int = 0
    total_time: float = 0.0
    termination: Termination = Termination.COMPLETED
    states: list = field(default_factory=list)
    times: list = field(default_factory=list)
    message: str = ""


class ConicInvariant(NamedTuple):
    beta: float
    caustic: CausticClass


class Branch(NamedTuple):
    state: BoundaryState
    kind: str  # "reflected" or "refracted"
    tir: bool = False


class JacobianReport(NamedTuple):
    matrix: np.ndarray
    det: float
    det_nu: float


# ---------------------------------------------------------------------------
# local laws


def reflect(xi: Vec, n: Vec) -> Vec:
    """Specular reflection ``xi - 2 (xi . n) n``."""
    d = 2.0 * (xi[0] * n[0] + xi[1] * n[1])
    out = (xi[0] - d * n[0], xi[1] - d * n[1])
    s = math.hypot(out[0], out[1])
    return (out[0] / s, out[1] / s)


def snell_refract(c_in: float, c_out: float, xi: Vec, n: Vec) -> Vec | None:
    """Refracted direction with ``c_in sin(phi_in) = c_out sin(phi_out)``.

    ``n`` faces the incoming ray (``xi . n < 0``).  Returns ``None`` on total
    internal reflection.
    """
    dn = xi[0] * n[0] + xi[1] * n[1]
    t = (xi[0] - dn * n[0], xi[1] - dn * n[1])
    k = c_in / c_out
    s2 = k * k * (t[0] * t[0] + t[1] * t[1])
    if s2 > 1.0:
        return None
    cn = math.sqrt(1.0 - s2)
    out = (k * t[0] - cn * n[0], k * t[1] - cn * n[1])
    s = math.hypot(out[0], out[1])
    return (out[0] / s, out[1] / s)


# ---------------------------------------------------------------------------
# coordinates


def _conic_params(domain: Domain, component: int):
    if isinstance(domain, Ellipse):
        return domain.a, domain.b
    if isinstance(domain, Disk):
        return domain.R, domain.R
    if isinstance(domain, CircularAnnulus):
        return (domain.R, domain.R) if component == 0 else (domain.r, domain.r)
    if isinstance(domain, ConfocalAnnulus):
        return (domain.a2, domain.b2) if component == 0 else (domain.a1, domain.b1)
    return None


def boundary_eta(domain: Domain, p: Vec, xi: Vec, component: int = 0, layer: int = 0, normal: Vec | None = None) -> float:
    """Normal-momentum coordinate of a boundary state (see module docs)."""
    if isinstance(domain, RadialLayers):
        return domain.speeds[layer] * _cross(p, xi)
    ab = _conic_params(domain, component)
    if ab is not None:
        a, b = ab
        return p[0] * xi[0] / (a * a) + p[1] * xi[1] / (b * b)
    n = normal if normal is not None else domain.boundary_normal(p)
    return _dot(xi, n)


def boundary_u(domain: Domain, p: Vec, component: int = 0) -> float:
    if component == 0 or isinstance(domain, Polygon):
        return domain.boundary_param(p)
    ab = _conic_params(domain, component)
    if ab is not None:
        return math.atan2(p[1] / ab[1], p[0] / ab[0]) % (2.0 * math.pi)
    return math.atan2(p[1], p[0]) % (2.0 * math.pi)


def state_from_uv(domain: Domain, u: float, v: float) -> BoundaryState:
    """Outer-wall state at arc parameter ``u`` with direction angle ``v``."""
    p = domain.boundary_point(u)
    n = domain.boundary_normal(p)
    xi = (math.cos(v), math.sin(v))
    if _dot(xi, n) <= EPS_TAN:
        raise ExceptionalSet("direction does not point into the table")
    return BoundaryState(p, u % domain.param_period, xi, boundary_eta(domain, p, xi, 0, 0, n), 0, 0)


def state_from_incidence(domain: Domain, u: float, phi: float) -> BoundaryState:
    """Outer-wall state whose direction makes angle ``phi`` with the inward normal.

    Positive ``phi`` gives counter-clockwise travel (``x ^ xi > 0`` on circles).
    """
    p = domain.boundary_point(u)
    n = domain.boundary_normal(p)
    v = math.atan2(n[1], n[0]) - phi
    return state_from_uv(domain, u, v)


def _state_uv(domain: Domain, s: BoundaryState) -> tuple[float, float]:
    return s.u, math.atan2(s.xi[1], s.xi[0])


# ---------------------------------------------------------------------------
# flow


def _advance(domain: Domain, x: Vec, xi: Vec, layer: int, policy: BranchPolicy):
    """One free flight plus the contact law.  Returns (hit, xi_out, layer_out, tir)."""
    if isinstance(domain, RadialLayers):
        hit = domain.intersect_ray(x, xi, layer)
        idx = hit.component
        wall = idx == 0 or (domain.has_hole and idx == len(domain.radii) - 1)
        if wall or policy == BranchPolicy.REFLECT:
            return hit, reflect(xi, hit.normal), layer, False
        other = idx - 1 if idx == layer else idx
        out = snell_refract(domain.speeds[layer], domain.speeds[other], xi, hit.normal)
        if out is None:
            return hit, reflect(xi, hit.normal), layer, True
        return hit, out, other, False
    hit = domain.intersect_ray(x, xi)
    return hit, reflect(xi, hit.normal), 0, False


def _make_state(domain, hit, xi_out, layer):
    return BoundaryState(
        hit.point,
        boundary_u(domain, hit.point, hit.component),
        xi_out,
        boundary_eta(domain, hit.point, xi_out, hit.component, layer, hit.normal),
        hit.component,
        layer,
    )


def step(domain: Domain, z: PhasePoint, layer: int | None = None, policy: BranchPolicy = BranchPolicy.REFRACT):
    """Fly from ``z`` to the first contact and apply the contact law.

    Returns ``(BoundaryState, flight_time)``.  For layered media the default
    law is refract-else-reflect.
    """
    if layer is None:
        layer = domain.layer_of(z.x) if isinstance(domain, RadialLayers) else 0
    hit, xi_out, new_layer, _ = _advance(domain, z.x, z.xi, layer, BranchPolicy(policy))
    return _make_state(domain, hit, xi_out, new_layer), hit.t


def orbit(
    domain: Domain,
    z0: PhasePoint,
    max_bounces: int = 100,
    max_time: float = math.inf,
    policy: BranchPolicy = BranchPolicy.REFRACT,
    layer: int | None = None,
) -> OrbitRecord:
    """Trace the billiard orbit of ``z0`` until a cap or an exceptional contact."""
    rec = OrbitRecord()
    x, xi = z0.x, z0.xi
    if layer is None:
        layer = domain.layer_of(x) if isinstance(domain, RadialLayers) else 0
    policy = BranchPolicy(policy)
    time = 0.0
    while rec.bounces < max_bounces:
        try:
            hit, xi_out, new_layer, _ = _advance(domain, x, xi, layer, policy)
        except CornerHit as exc:
            rec.termination, rec.message = Termination.CORNER, str(exc)
            break
        except GrazingHit as exc:
            rec.termination, rec.message = Termination.GRAZING, str(exc)
            break
        except NoIntersection as exc:
            rec.termination, rec.message = Termination.ESCAPED, str(exc)
            break
        if time + hit.t > max_time:
            dt = max_time - time
            end = (x[0] + dt * xi[0], x[1] + dt * xi[1])
            rec.segments.append((x, end, layer))
            time = max_time
            break
        time += hit.t
        rec.segments.append((x, hit.point, layer))
        st = _make_state(domain, hit, xi_out, new_layer)
        rec.states.append(st)
        rec.times.append(time)
        rec.bounces += 1
        x, xi, layer = hit.point, xi_out, new_layer
    rec.total_time = time
    return rec


def boundary_map(domain: Domain, s: BoundaryState, policy: BranchPolicy = BranchPolicy.REFRACT):
    """First return ``Phi(s)`` to the outer wall and the return time.

    In two-wall tables at most one inner reflection occurs on the way (the
    inner wall is convex); layered media follow ``policy`` until the outer
    wall is reached again.
    """
    x, xi, layer = s.p, s.xi, s.layer
    total = 0.0
    for _ in range(100000):
        hit, xi_out, layer, _ = _advance(domain, x, xi, layer, BranchPolicy(policy))
        total += hit.t
        if hit.component == 0:
            return _make_state(domain, hit, xi_out, layer), total
        x, xi = hit.point, xi_out
    raise ExceptionalSet("orbit did not return to the outer wall")


# ---------------------------------------------------------------------------
# invariants


def conic_invariant(domain: Domain, z) -> ConicInvariant:
    """Confocal invariant ``beta = (x1 xi2 - x2 xi1)^2 - c^2 xi2^2`` and caustic class.

    ``z`` is a PhasePoint or BoundaryState; ``c^2`` is that of the outer wall.
    """
    if isinstance(domain, Ellipse):
        c2, a = domain.c2, domain.a
    elif isinstance(domain, ConfocalAnnulus):
        c2, a = domain.c2, domain.a2
    elif isinstance(domain, (Disk, CircularAnnulus)):
        c2, a = 0.0, domain.R
    else:
        raise WrongDomain(f"conic invariant undefined for {domain.kind}")
    x = z.x if isinstance(z, PhasePoint) else z.p
    xi = z.xi
    beta = _cross(x, xi) ** 2 - c2 * xi[1] ** 2
    return ConicInvariant(beta, classify_beta(beta, a))


def classify_beta(beta: float, a: float) -> CausticClass:
    eps = 1e-12 * a * a
    if beta > eps:
        return CausticClass.CONFOCAL_ELLIPSE
    if beta < -eps:
        return CausticClass.CONFOCAL_HYPERBOLA
    return CausticClass.THROUGH_FOCI


def measure_density(s: BoundaryState) -> float:
    """Unnormalised density ``|eta|`` of the invariant measure in ``(u, v)``."""
    return abs(s.eta)


# ---------------------------------------------------------------------------
# Jacobians


def _wrap(d: float, period: float) -> float:
    return (d + 0.5 * period) % period - 0.5 * period


def _phi_uv(domain, u, v):
    s = state_from_uv(domain, u, v)
    s2, _ = boundary_map(domain, s)
    return s, s2


def jacobian_boundary_map(domain: Domain, s: BoundaryState, fd_step: float = 1e-6) -> JacobianReport:
    """Central-difference ``D Phi`` at ``s`` in ``(u, v)`` coordinates.

    ``det_nu = det(D Phi) |eta(Phi s)| / |eta(s)|`` equals 1 when the map
    preserves ``|eta| du dv``.
    """
    a_b = None
    if isinstance(domain, Ellipse):
        a_b = (domain.a, domain.b)
    elif isinstance(domain, ConfocalAnnulus):
        a_b = (domain.a2, domain.b2)
    if a_b is not None and (a_b[0] - a_b[1]) / a_b[0] < 1e-3:
        warnings.warn("near-circular ellipse: Jacobian diagnostics are poorly conditioned", RuntimeWarning, stacklevel=2)
    u0, v0 = _state_uv(domain, s)
    P = domain.param_period
    h = fd_step
    try:
        _, base = _phi_uv(domain, u0, v0)
        cols = []
        for du, dv in ((h, 0.0), (0.0, h)):
            _, sp = _phi_uv(domain, u0 + du, v0 + dv)
            _, sm = _phi_uv(domain, u0 - du, v0 - dv)
            up, vp = _state_uv(domain, sp)
            um, vm = _state_uv(domain, sm)
            cols.append((_wrap(up - um, P) / (2 * h), _wrap(vp - vm, 2 * math.pi) / (2 * h)))
    except NumericRangeError as exc:
        raise ExceptionalSet(f"perturbed orbit is exceptional: {exc}") from exc
    J = np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])
    det = float(np.linalg.det(J))
    det_nu = det * abs(base.eta) / abs(s.eta)
    return JacobianReport(J, det, det_nu)


def jacobian_iterates(domain: Domain, s: BoundaryState, n: int, fd_step: float = 1e-6):
    """``D Phi^k`` for k = 1..n by the chain rule along the orbit of ``s``."""
    M = np.eye(2)
    out = []
    cur = s
    for _ in range(n):
        rep = jacobian_boundary_map(domain, cur, fd_step)
        M = rep.matrix @ M
        out.append(M.copy())
        cur, _ = boundary_map(domain, cur)
    return out


# ---------------------------------------------------------------------------
# branching


def branch_step(layers: RadialLayers, s: BoundaryState, policy: BranchPolicy = BranchPolicy.REFRACT) -> list[Branch]:
    """Successors of a ray arriving at a circle of a layered medium.

    ``s.xi`` is the incoming direction and ``s.layer`` the medium it travels
    in.  Walls always reflect.  ``REFRACT`` falls back to reflection on total
    internal reflection (``tir=True``); ``BOTH`` returns reflected and
    refracted successors when refraction exists.
    """
    if not isinstance(layers, RadialLayers):
        raise WrongDomain("branch_step needs a RadialLayers table")
    policy = BranchPolicy(policy)
    p, xi, k = s.p, s.xi, s.layer
    idx = min(range(len(layers.radii)), key=lambda i: abs(math.hypot(*p) - layers.radii[i]))
    rho = math.hypot(p[0], p[1])
    n = (p[0] / rho, p[1] / rho)
    if _dot(n, xi) > 0.0:
        n = (-n[0], -n[1])

    def mk(direction, layer, kind, tir=False):
        eta = layers.speeds[layer] * _cross(p, direction)
        st = BoundaryState(p, math.atan2(p[1], p[0]) % (2 * math.pi), direction, eta, idx, layer)
        return Branch(st, kind, tir)

    refl = mk(reflect(xi, n), k, "reflected")
    wall = idx == 0 or (layers.has_hole and idx == len(layers.radii) - 1)
    if wall or policy == BranchPolicy.REFLECT:
        return [refl]
    other = idx - 1 if idx == k else idx
    out = snell_refract(layers.speeds[k], layers.speeds[other], xi, n)
    if out is None:
        return [refl._replace(tir=True)]
    refr = mk(out, other, "refracted")
    return [refl, refr] if policy == BranchPolicy.BOTH else [refr]


def branch_tree(layers: RadialLayers, z: PhasePoint, depth: int, layer: int | None = None) -> list[list[Branch]]:
    """All branch sequences of length ``depth`` under the ``BOTH`` policy."""
    if layer is None:
        layer = layers.layer_of(z.x)
    paths = [([], z.x, z.xi, layer)]
    for _ in range(depth):
        nxt = []
        for hist, x, xi, k in paths:
            hit = layers.intersect_ray(x, xi, k)
            s = BoundaryState(hit.point, 0.0, xi, 0.0, hit.component, k)
            for br in branch_step(layers, s, BranchPolicy.BOTH):
                nxt.append((hist + [br], br.state.p, br.state.xi, br.state.layer))
        paths = nxt
    return [h for h, *_ in paths]


# ---------------------------------------------------------------------------
# vectorised conic orbits


def conic_orbits_batch(domain: Domain, x0, xi0, n_bounces: int):
    """Trace many orbits in a conic table at once.

    Parameters
    ----------
    domain : Ellipse, Disk, CircularAnnulus or ConfocalAnnulus
    x0, xi0 : array_like, shape (n, 2)
        Interior start points and unit directions.
    n_bounces : int

    Returns
    -------
    P, XI : ndarray, shape (n, n_bounces + 1, 2)
        Positions and outgoing directions; row 0 is the start.
    term : ndarray of str
        Termination per orbit; rows after a grazing contact repeat the last state.
    """
    walls = []
    if isinstance(domain, Ellipse):
        walls = [(domain.a, domain.b, 1.0)]
    elif isinstance(domain, Disk):
        walls = [(domain.R, domain.R, 1.0)]
    elif isinstance(domain, CircularAnnulus):
        walls = [(domain.R, domain.R, 1.0), (domain.r, domain.r, -1.0)]
    elif isinstance(domain, ConfocalAnnulus):
        walls = [(domain.a2, domain.b2, 1.0), (domain.a1, domain.b1, -1.0)]
    else:
        raise WrongDomain("batched tracing supports conic tables only")
    eps = domain.eps_bd
    if len(walls) == 1:
        return _single_wall_batch(walls[0][0], walls[0][1], eps, x0, xi0, n_bounces)
    x = np.array(x0, dtype=float).reshape(-1, 2)
    xi = np.array(xi0, dtype=float).reshape(-1, 2)
    xi /= np.hypot(xi[:, 0], xi[:, 1])[:, None]
    n = x.shape[0]
    P = np.empty((n, n_bounces + 1, 2))
    XI = np.empty((n, n_bounces + 1, 2))
    P[:, 0], XI[:, 0] = x, xi
    alive = np.ones(n, dtype=bool)
    escaped = np.zeros(n, dtype=bool)
    grazed = np.zeros(n, dtype=bool)
    for j in range(1, n_bounces + 1):
        best_t = np.full(n, np.inf)
        best_w = np.zeros(n, dtype=int)
        for w, (a, b, _) in enumerate(walls):
            A = xi[:, 0] ** 2 / a**2 + xi[:, 1] ** 2 / b**2
            B = 2.0 * (x[:, 0] * xi[:, 0] / a**2 + x[:, 1] * xi[:, 1] / b**2)
            C = x[:, 0] ** 2 / a**2 + x[:, 1] ** 2 / b**2 - 1.0
            disc = B * B - 4.0 * A * C
            ok = disc >= 0.0
            sq = np.sqrt(np.where(ok, disc, 0.0))
            q = -0.5 * (B + np.copysign(sq, B))
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = np.where(ok & (A != 0), q / A, np.inf)
                t2 = np.where(ok & (q != 0), C / q, np.inf)
            t1 = np.where(t1 > eps, t1, np.inf)
            t2 = np.where(t2 > eps, t2, np.inf)
            t = np.minimum(t1, t2)
            better = t < best_t
            best_t = np.where(better, t, best_t)
            best_w = np.where(better, w, best_w)
        miss = ~np.isfinite(best_t) & alive
        escaped |= miss
        alive &= ~miss
        tt = np.where(alive, best_t, 0.0)
        p = x + tt[:, None] * xi
        nrm = np.empty_like(p)
        for w, (a, b, sgn) in enumerate(walls):
            sel = best_w == w
            s = np.sqrt(p[sel, 0] ** 2 / a**2 + p[sel, 1] ** 2 / b**2)
            p[sel] /= s[:, None]
            g = np.stack([p[sel, 0] / a**2, p[sel, 1] / b**2], axis=1)
            g /= np.hypot(g[:, 0], g[:, 1])[:, None]
            nrm[sel] = -sgn * g
        dn = np.sum(xi * nrm, axis=1)
        graze = alive & (np.abs(dn) < EPS_TAN)
        alive &= ~graze
        new_xi = xi - 2.0 * dn[:, None] * nrm
        new_xi /= np.hypot(new_xi[:, 0], new_xi[:, 1])[:, None]
        x = np.where(alive[:, None], p, x)
        xi = np.where(alive[:, None], new_xi, xi)
        P[:, j], XI[:, j] = x, xi
        grazed |= graze
    term = np.where(escaped, Termination.ESCAPED.value, np.where(grazed, Termination.GRAZING.value, Termination.COMPLETED.value))
    return P, XI, term


def _single_wall_batch(a, b, eps, x0, xi0, n_bounces):
    x = np.array(x0, dtype=float).reshape(-1, 2)
    n = x.shape[0]
    X, Y = x[:, 0].copy(), x[:, 1].copy()
    U, V = np.array(xi0, dtype=float).reshape(-1, 2).T.copy()
    nn = np.hypot(U, V)
    U /= nn
    V /= nn
    ia, ib = 1.0 / (a * a), 1.0 / (b * b)
    P = np.empty((n, n_bounces + 1, 2))
    XI = np.empty((n, n_bounces + 1, 2))
    P[:, 0, 0], P[:, 0, 1], XI[:, 0, 0], XI[:, 0, 1] = X, Y, U, V
    grazed = np.zeros(n, dtype=bool)
    escaped = np.zeros(n, dtype=bool)
    for j in range(1, n_bounces + 1):
        A = U * U * ia + V * V * ib
        B = 2.0 * (X * U * ia + Y * V * ib)
        C = X * X * ia + Y * Y * ib - 1.0
        disc = B * B - 4.0 * A * C
        bad = disc < 0.0
        q = -0.5 * (B + np.copysign(np.sqrt(np.abs(disc)), B))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = q / A
            t2 = C / q
        t = np.where(t1 > eps, t1, np.inf)
        t = np.minimum(t, np.where(t2 > eps, t2, np.inf))
        bad |= ~np.isfinite(t)
        escaped |= bad & ~grazed
        stop = escaped | grazed
        t = np.where(stop, 0.0, t)
        px, py = X + t * U, Y + t * V
        sc = 1.0 / np.sqrt(px * px * ia + py * py * ib)
        px *= sc
        py *= sc
        gx, gy = px * ia, py * ib
        g = np.hypot(gx, gy)
        gx /= g
        gy /= g
        dn = U * gx + V * gy
        graze = ~stop & (np.abs(dn) < EPS_TAN)
        grazed |= graze
        keep = ~(stop | graze)
        nu = U - 2.0 * dn * gx
        nv = V - 2.0 * dn * gy
        m = np.hypot(nu, nv)
        X = np.where(keep, px, X)
        Y = np.where(keep, py, Y)
        U = np.where(keep, nu / m, U)
        V = np.where(keep, nv / m, V)
        P[:, j, 0], P[:, j, 1], XI[:, j, 0], XI[:, j, 1] = X, Y, U, V
    term = np.where(escaped, Termination.ESCAPED.value, np.where(grazed, Termination.GRAZING.value, Termination.COMPLETED.value))
    return P, XI, term


def beta_batch(domain: Domain, P: np.ndarray, XI: np.ndarray) -> np.ndarray:
    """Vectorised confocal invariant over arrays of positions and directions."""
    c2 = domain.c2 if isinstance(domain, (Ellipse, ConfocalAnnulus)) else 0.0
    cross = P[..., 0] * XI[..., 1] - P[..., 1] * XI[..., 0]
    return cross**2 - c2 * XI[..., 1] ** 2


# ---------------------------------------------------------------------------
# serialisation

ORBIT_COLUMNS = ("bounce", "x", "y", "xi_x", "xi_y", "t", "layer", "beta")


def _beta_or_nan(domain, st):
    try:
        return conic_invariant(domain, st).beta
    except WrongDomain:
        return float("nan")


def orbit_rows(domain: Domain, rec: OrbitRecord) -> list[tuple]:
    return [
        (i + 1, st.p[0], st.p[1], st.xi[0], st.xi[1], t, st.layer, _beta_or_nan(domain, st))
        for i, (st, t) in enumerate(zip(rec.states, rec.times))
    ]


def orbit_to_csv(domain: Domain, rec: OrbitRecord, header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write(header.rstrip("\r\n") + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(ORBIT_COLUMNS)
    for row in orbit_rows(domain, rec):
        w.writerow([row[0]] + [f"{v:.17g}" for v in row[1:6]] + [row[6], f"{row[7]:.17g}"])
    return buf.getvalue()


def orbit_to_json(domain: Domain, rec: OrbitRecord) -> dict:
    return {
        "domain": domain.to_dict(),
        "bounces": rec.bounces,
        "total_time": rec.total_time,
        "termination": rec.termination.value,
        "message": rec.message,
        "rows": [dict(zip(ORBIT_COLUMNS, r)) for r in orbit_rows(domain, rec)],
        "segments": [[list(a), list(b), k] for a, b, k in rec.segments],
    }


def orbit_json_dumps(domain: Domain, rec: OrbitRecord) -> str:
    return json.dumps(orbit_to_json(domain, rec), sort_keys=True, allow_nan=True)
