"""Rescaling quantities near the boundary: gamma, capped escape times, remainder integrals.

``gamma(x) = dist(x, boundary) / 2`` and ``X_zeta = {gamma >= zeta}``.  The
escape times ``T_+`` / ``T_-`` measure how long the straight line through
``(x, xi)`` stays in ``X_zeta`` forward / backward, and
``T* = min(T_+ + T_-, 2 T0)``.

Phase-space integrals use ``dx dv`` on the unit circle bundle, i.e. a zone of
area ``A`` has total mass ``2 pi A``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from ._rng import batch_rng, batch_sizes, run_batches
from .errors import ConfigError, OutsideZone
from .geometry import (
    CircularAnnulus,
    ConfocalAnnulus,
    Disk,
    Domain,
    Ellipse,
    PhasePoint,
    Polygon,
    RadialLayers,
)


def gamma(domain: Domain, x):
    """Half the distance to the boundary (vectorised)."""
    return 0.5 * domain.signed_distance(x)


# ---------------------------------------------------------------------------
# zone geometry


def _circle_shape(domain: Domain):
    """(R, r) for tables whose zones are disks or annuli, else None."""
    if isinstance(domain, Disk):
        return domain.R, 0.0
    if isinstance(domain, CircularAnnulus):
        return domain.R, domain.r
    if isinstance(domain, RadialLayers):
        return domain.radii[0], (domain.radii[-1] if domain.has_hole else 0.0)
    return None


def _exit_circle(px, py, ux, uy, rho):
    """Forward time to leave the disk ``|x| <= rho`` from inside (vectorised)."""
    b = px * ux + py * uy
    c = px * px + py * py - rho * rho
    disc = np.maximum(b * b - c, 0.0)
    return np.maximum(-b + np.sqrt(disc), 0.0)


def _enter_circle(px, py, ux, uy, rho):
    """Forward time to enter the disk ``|x| <= rho`` from outside; inf if missed."""
    b = px * ux + py * uy
    c = px * px + py * py - rho * rho
    disc = b * b - c
    t = -b - np.sqrt(np.maximum(disc, 0.0))
    return np.where((disc > 0.0) & (t >= 0.0), t, np.inf)


def _convex_exit(domain: Polygon, px, py, ux, uy, d):
    """Forward exit time from the inner parallel set of a convex polygon."""
    v = domain.vertices
    n = len(v)
    t = np.full(np.shape(px), np.inf)
    for i in range(n):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % n]
        L = math.hypot(x1 - x0, y1 - y0)
        nx, ny = -(y1 - y0) / L, (x1 - x0) / L
        slack = nx * (px - x0) + ny * (py - y0) - d
        rate = nx * ux + ny * uy
        with np.errstate(divide="ignore", invalid="ignore"):
            ti = np.where(rate < 0.0, slack / -rate, np.inf)
        t = np.minimum(t, np.maximum(ti, 0.0))
    return t


def _capsule_entry(px, py, ux, uy, a, b, rad):
    """Forward entry time of rays into the capsule around segment ``ab``."""
    ax, ay = a
    bx, by = b
    L = math.hypot(bx - ax, by - ay)
    ex, ey = (bx - ax) / L, (by - ay) / L
    nx, ny = -ey, ex
    t = np.minimum(_enter_circle(px - ax, py - ay, ux, uy, rad), _enter_circle(px - bx, py - by, ux, uy, rad))
    # slab |n.(x-a)| <= rad with 0 <= e.(x-a) <= L
    s0 = nx * (px - ax) + ny * (py - ay)
    rate = nx * ux + ny * uy
    for target in (rad, -rad):
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = (target - s0) / rate
            along = ex * (px + tt * ux - ax) + ey * (py + tt * uy - ay)
            ok = (tt >= 0.0) & (along >= 0.0) & (along <= L) & np.isfinite(tt)
        t = np.minimum(t, np.where(ok, tt, np.inf))
    return t


def _sphere_trace(domain: Domain, px, py, ux, uy, d, max_iter=200):
    """Exit time from ``{dist >= d}`` by sphere tracing plus bisection."""
    t = np.zeros(np.shape(px))
    active = np.ones(np.shape(px), dtype=bool)
    tol = 1e-12 * domain.diam
    for _ in range(max_iter):
        if not np.any(active):
            break
        q = np.stack([px[active] + t[active] * ux[active], py[active] + t[active] * uy[active]], axis=-1)
        slack = np.atleast_1d(domain.signed_distance(q)) - d
        step = np.maximum(slack, 0.0)
        idx = np.nonzero(active)[0]
        t[idx] += step + tol
        active[idx[step <= tol]] = False
    # bracket refinement: the crossing lies in [t - slack, t + small]
    lo = np.maximum(t - 4 * tol, 0.0)
    hi = t + 1e-9 * domain.diam
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        q = np.stack([px + mid * ux, py + mid * uy], axis=-1)
        inside = np.atleast_1d(domain.signed_distance(q)) >= d
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


def escape_times(domain: Domain, x, xi, zeta):
    """Vectorised ``(T_+, T_-)`` for points ``x`` and directions ``xi`` (shape ``(n, 2)``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    zeta = np.broadcast_to(np.asarray(zeta, dtype=float), (x.shape[0],))
    d = 2.0 * zeta
    out = []
    for sgn in (1.0, -1.0):
        px, py = x[:, 0], x[:, 1]
        ux, uy = sgn * xi[:, 0], sgn * xi[:, 1]
        shape = _circle_shape(domain)
        if shape is not None:
            R, r = shape
            t = _exit_circle(px, py, ux, uy, R - d)
            if r > 0.0:
                t = np.minimum(t, _enter_circle(px, py, ux, uy, r + d))
        elif isinstance(domain, Polygon) and domain.is_convex:
            t = _convex_exit(domain, px, py, ux, uy, d)
        elif isinstance(domain, Polygon):
            v = domain.vertices
            t = np.full(px.shape, np.inf)
            for i in range(len(v)):
                t = np.minimum(t, _capsule_entry(px, py, ux, uy, v[i], v[(i + 1) % len(v)], d))
        else:
            t = _sphere_trace(domain, px, py, ux, uy, d)
        out.append(t)
    return out[0], out[1]


class EscapeTimes(NamedTuple):
    T_plus: float
    T_minus: float
    T_star: float


def capped_escape_time(domain: Domain, z: PhasePoint, zeta: float, T0: float) -> EscapeTimes:
    """Straight-line residence times in ``X_zeta`` and ``T* = min(T_+ + T_-, 2 T0)``."""
    g = float(gamma(domain, np.asarray(z.x, dtype=float)))
    if g < zeta * (1.0 - 1e-12) - 1e-15:
        raise OutsideZone(f"gamma(x) = {g:.6g} < zeta = {zeta:.6g}")
    tp, tm = escape_times(domain, [z.x], [z.xi], zeta)
    tp, tm = float(tp[0]), float(tm[0])
    return EscapeTimes(tp, tm, min(tp + tm, 2.0 * T0))


# ---------------------------------------------------------------------------
# areas of distance bands


def _clip_halfplane(poly, nx, ny, c):
    """Keep the part of ``poly`` with ``n . p >= c``."""
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp = nx * p[0] + ny * p[1] - c
        fq = nx * q[0] + ny * q[1] - c
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def _poly_area(poly):
    m = len(poly)
    if m < 3:
        return 0.0
    return 0.5 * abs(sum(poly[i][0] * poly[(i + 1) % m][1] - poly[(i + 1) % m][0] * poly[i][1] for i in range(m)))


@functools.lru_cache(maxsize=4)
def _grid_distances(domain: Domain, n: int):
    """Sorted boundary distances on an ``n x n`` cell-centre grid and the cell area."""
    x0, x1, y0, y1 = domain.bounding_box()
    dx, dy = (x1 - x0) / n, (y1 - y0) / n
    xs = x0 + (np.arange(n) + 0.5) * dx
    ys = y0 + (np.arange(n) + 0.5) * dy
    rows = [domain.signed_distance(np.stack([xs, np.full_like(xs, y)], axis=-1)) for y in ys]
    return np.sort(np.concatenate(rows)), dx * dy


def _grid_inner_area(domain: Domain, d: float, n: int = 2000) -> float:
    dist, cell = _grid_distances(domain, n)
    return float(dist.size - np.searchsorted(dist, d, side="left")) * cell


def inner_area(domain: Domain, d: float) -> float:
    """Area of ``{x : dist(x, boundary) >= d}``.

    Exact for disks, annuli and convex polygons; Steiner's formula for
    ellipses and confocal annuli while ``d`` stays below the smallest
    curvature radius and the two walls' bands do not touch; grid
    quadrature otherwise.
    """
    if d <= 0.0:
        return domain.metrics()[0]
    shape = _circle_shape(domain)
    if shape is not None:
        R, r = shape
        if r == 0.0:
            return math.pi * max(R - d, 0.0) ** 2
        if R - d <= r + d:
            return 0.0
        return math.pi * ((R - d) ** 2 - (r + d) ** 2)
    if isinstance(domain, Polygon) and domain.is_convex:
        poly = list(domain.vertices)
        v = domain.vertices
        for i in range(len(v)):
            (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
            L = math.hypot(x1 - x0, y1 - y0)
            nx, ny = -(y1 - y0) / L, (x1 - x0) / L
            poly = _clip_halfplane(poly, nx, ny, nx * x0 + ny * y0 + d)
            if not poly:
                return 0.0
        return _poly_area(poly)
    if isinstance(domain, Ellipse) and d <= domain.b**2 / domain.a:
        A, P = domain.metrics()
        return A - P * d + math.pi * d * d
    if isinstance(domain, ConfocalAnnulus) and d <= domain.b2**2 / domain.a2 and 2.0 * d <= domain.b2 - domain.b1:
        A2, P2 = domain.outer.metrics()
        A1, P1 = domain.inner.metrics()
        return (A2 - P2 * d + math.pi * d * d) - (A1 + P1 * d + math.pi * d * d)
    return _grid_inner_area(domain, d)


def band_area(domain: Domain, g_lo: float, g_hi: float) -> float:
    """Area of ``{g_lo <= gamma <= g_hi}``."""
    if g_hi <= g_lo:
        return 0.0
    return max(inner_area(domain, 2.0 * g_lo) - inner_area(domain, 2.0 * g_hi), 0.0)


def layer_volume(domain: Domain, beta: float) -> float:
    """Area of the layer ``{beta <= gamma <= 2 beta}``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return band_area(domain, beta, 2.0 * beta)


# ---------------------------------------------------------------------------
# remainder integrals


@dataclass(frozen=True)
class ZoneSpec:
    """Zone ``gamma_min <= gamma <= gamma_max`` with the zeta and T0 rules.

    ``zeta_rule = "power"`` uses ``zeta = gamma^(2 - delta)``, ``"fixed"`` the
    constant ``zeta``.  ``T0 = gamma^(1 - delta1)``.  Setting ``seeley_h``
    replaces ``T*`` by the position-only rule
    ``min(gamma^(1/2), seeley_h^(-seeley_delta) gamma)``.
    """

    gamma_min: float
    gamma_max: float
    zeta_rule: str = "power"
    delta: float = 0.1
    zeta: float | None = None
    delta1: float = 0.1
    seeley_h: float | None = None
    seeley_delta: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.gamma_min <= self.gamma_max):
            raise ConfigError("need 0 < gamma_min <= gamma_max")
        if self.zeta_rule not in ("power", "fixed"):
            raise ConfigError("zeta_rule must be 'power' or 'fixed'")
        if self.zeta_rule == "fixed":
            if self.zeta is None or not self.zeta > 0:
                raise ConfigError("fixed rule needs zeta > 0")
            if self.zeta > self.gamma_min:
                raise ConfigError("fixed zeta must not exceed gamma_min")

    def zeta_of(self, g):
        if self.zeta_rule == "fixed":
            return np.full(np.shape(g), float(self.zeta))
        return np.asarray(g, dtype=float) ** (2.0 - self.delta)

    def T0_of(self, g):
        return np.asarray(g, dtype=float) ** (1.0 - self.delta1)

    @classmethod
    def from_dict(cls, obj: dict) -> "ZoneSpec":
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(f"bad zone spec: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RemainderReport:
    estimate: float
    stderr: float
    samples: int
    seed: int
    zone: ZoneSpec
    discarded: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zone"] = self.zone.to_dict()
        return d


def dyadic_strata(g_lo: float, g_hi: float) -> list[tuple[float, float]]:
    out = []
    a = g_lo
    while a < g_hi:
        b = min(2.0 * a, g_hi)
        out.append((a, b))
        a = b
    return out


def _sample_band(domain: Domain, rng: np.random.Generator, count: int, g_lo: float, g_hi: float):
    """Uniform points in ``{g_lo <= gamma <= g_hi}``."""
    shape = _circle_shape(domain)
    if shape is not None:
        R, r = shape
        # radii with dist in [2 g_lo, 2 g_hi] from either wall
        pieces = [(max(R - 2 * g_hi, 0.0), R - 2 * g_lo)]
        if r > 0.0:
            mid = 0.5 * (R + r)
            pieces = [(max(R - 2 * g_hi, mid), R - 2 * g_lo), (r + 2 * g_lo, min(r + 2 * g_hi, mid))]
        pieces = [(a, b) for a, b in pieces if b > a]
        w = np.array([b * b - a * a for a, b in pieces])
        which = rng.choice(len(pieces), size=count, p=w / w.sum()) if len(pieces) > 1 else np.zeros(count, int)
        lo2 = np.array([a * a for a, _ in pieces])[which]
        hi2 = np.array([b * b for _, b in pieces])[which]
        rho = np.sqrt(lo2 + rng.random(count) * (hi2 - lo2))
        th = rng.random(count) * 2.0 * math.pi
        return np.stack([rho * np.cos(th), rho * np.sin(th)], axis=-1)
    x0, x1, y0, y1 = domain.bounding_box()
    pts = np.empty((0, 2))
    while pts.shape[0] < count:
        cand = np.stack([x0 + rng.random(4 * count + 64) * (x1 - x0), y0 + rng.random(4 * count + 64) * (y1 - y0)], axis=-1)
        g = 0.5 * domain.signed_distance(cand)
        pts = np.concatenate([pts, cand[(g >= g_lo) & (g <= g_hi)]])
    return pts[:count]


def _inv_T(domain: Domain, zone: ZoneSpec, x: np.ndarray, v: np.ndarray):
    g = 0.5 * domain.signed_distance(x)
    if zone.seeley_h is not None:
        T = np.minimum(np.sqrt(g), zone.seeley_h ** (-zone.seeley_delta) * g)
        return 1.0 / T, np.zeros(g.shape, dtype=bool)
    xi = np.stack([np.cos(v), np.sin(v)], axis=-1)
    zeta = zone.zeta_of(g)
    tp, tm = escape_times(domain, x, xi, zeta)
    Tstar = np.minimum(tp + tm, 2.0 * zone.T0_of(g))
    bad = ~np.isfinite(Tstar) | (Tstar <= 0.0)
    with np.errstate(divide="ignore"):
        inv = np.where(bad, 0.0, 1.0 / np.where(bad, 1.0, Tstar))
    return inv, bad


def _stratum_batch(domain, zone, seed, stratum, index, count, g_lo, g_hi):
    rng = batch_rng(seed, stratum, index)
    x = _sample_band(domain, rng, count, g_lo, g_hi)
    v = rng.random(count) * 2.0 * math.pi
    inv, bad = _inv_T(domain, zone, x, v)
    good = inv[~bad]
    return good.size, float(good.sum()), float((good * good).sum()), int(bad.sum())


def remainder_integral(
    domain: Domain,
    zone: ZoneSpec,
    samples: int,
    seed: int,
    threads: int = 1,
    batch: int = 65536,
) -> RemainderReport:
    """Stratified Monte-Carlo estimate of ``int 1/T* dx dv`` over the zone.

    Strata are the dyadic gamma-layers ``[b, 2b]`` starting at ``gamma_min``;
    samples are allocated in proportion to stratum area by largest remainders
    (at least 2 each).
    The error is the stratified standard error.
    """
    if zone.gamma_max <= zone.gamma_min:
        return RemainderReport(0.0, 0.0, samples, seed, zone)
    strata = dyadic_strata(zone.gamma_min, zone.gamma_max)
    vols = np.array([band_area(domain, a, b) for a, b in strata])
    if vols.sum() <= 0.0:
        return RemainderReport(0.0, 0.0, samples, seed, zone)
    share = samples * vols / vols.sum()
    alloc = np.floor(share).astype(int)
    # largest remainders first so the total is exactly ``samples``
    for k in np.argsort(-(share - alloc), kind="stable")[: samples - int(alloc.sum())]:
        alloc[k] += 1
    alloc = np.where(vols > 0.0, np.maximum(alloc, 2), 0)
    jobs = []
    for s, ((a, b), n_s) in enumerate(zip(strata, alloc)):
        for i, c in enumerate(batch_sizes(int(n_s), batch)):
            jobs.append((s, i, c, a, b))
    res = run_batches(lambda s, i, c, a, b: _stratum_batch(domain, zone, seed, s, i, c, a, b), jobs, threads)
    est = 0.0
    var = 0.0
    discarded = 0
    for s in range(len(strata)):
        n = tot = tot2 = 0.0
        for (js, *_), r in zip(jobs, res):
            if js == s:
                n += r[0]
                tot += r[1]
                tot2 += r[2]
                discarded += r[3]
        if n == 0:
            continue
        mean = tot / n
        svar = max(tot2 / n - mean * mean, 0.0) * n / max(n - 1.0, 1.0)
        w = 2.0 * math.pi * vols[s]
        est += w * mean
        var += w * w * svar / n
    return RemainderReport(est, math.sqrt(var), int(alloc.sum()), seed, zone, discarded)


# ---------------------------------------------------------------------------
# boundary-regularity integrals


class ModulusReport(NamedTuple):
    value: float  # integral over J
    converges: bool  # integral over (0, upper] finite
    full_estimate: float  # extrapolated (0, upper] integral, inf if divergent
    increments: tuple


def _s_integrand(nu1: Callable, kind: str):
    # with t = exp(-s): dt / t = ds
    def ratio(s):
        t = math.exp(-s)
        return float(nu1(t)) / t

    if kind == "general":
        return ratio
    return lambda s: ratio(s) ** 2


def modulus_integrals(
    nu1: Callable[[float], float],
    h: float,
    delta: float,
    kind: str = "general",
    upper: float = 1.0,
    levels: int = 10,
) -> ModulusReport:
    """Integrals of a boundary modulus of continuity.

    ``general``: ``int_J nu1(t) dt / t^2``; ``schrodinger``:
    ``int_J nu1(t)^2 dt / t^3`` with ``J = [h, h^(1-delta)] u [h^delta, upper]``.
    Convergence on ``(0, upper]`` is judged from the increments over the
    cut-offs ``t = exp(-2^k)``: geometric decay with ratio below 0.95 counts
    as convergent, and the limit is then Aitken-extrapolated.
    """
    kind = kind.lower()
    if kind not in ("general", "schrodinger"):
        raise ValueError("kind must be 'general' or 'schrodinger'")
    if not (0.0 < h < 1.0 and 0.0 < delta < 0.5):
        raise ValueError("need 0 < h < 1 and 0 < delta < 1/2")
    f = _s_integrand(nu1, kind)
    s_up = -math.log(upper)

    def piece(t_lo, t_hi):
        t_hi = min(t_hi, upper)
        if t_hi <= t_lo:
            return 0.0
        val, _ = integrate.quad(f, -math.log(t_hi), -math.log(t_lo), epsabs=1e-13, epsrel=1e-11, limit=400)
        return val

    value = piece(h, h ** (1.0 - delta)) + piece(h**delta, upper)

    cuts = [max(s_up, 0.0) + 2.0**k for k in range(levels)]
    incs = []
    prev = s_up
    for c in cuts:
        val, _ = integrate.quad(f, prev, c, epsabs=1e-14, epsrel=1e-12, limit=400)
        incs.append(val)
        prev = c
    tail = incs[-4:]
    total = sum(incs)
    if all(abs(x) < 1e-300 for x in tail):
        return ModulusReport(value, True, total, tuple(incs))
    ratios = [abs(tail[i + 1]) / abs(tail[i]) if tail[i] != 0 else math.inf for i in range(3)]
    converges = all(r < 0.95 for r in ratios)
    if not converges:
        return ModulusReport(value, False, math.inf, tuple(incs))
    # Aitken on the partial sums
    S = np.cumsum(incs)
    s0, s1, s2 = S[-3], S[-2], S[-1]
    den = s2 - 2 * s1 + s0
    limit = s2 - (s2 - s1) ** 2 / den if den != 0 else s2
    return ModulusReport(value, True, float(limit), tuple(incs))
