"""Rotation functions of rotationally symmetric tables and periodic-set diagnostics.

For a radial profile ``(mu(r), V(r))`` the angular momentum ``eta`` is
conserved and the central angle swept between consecutive boundary hits is

    f(eta) = 2 * int_{r1}^{1} mu^2 r^-2 eta / sqrt(V - mu^2 r^-2 eta^2) dr

where ``r1`` is the turning radius (or the inner wall).  The cylinder variant
drops the ``r^-2`` factors and integrates over ``z``.  The speed profile
``lambda(r)`` does not change trajectories and is carried only as metadata.

For negative ``eta`` the polar functions are extended by
``f(-eta) = 2 f(0+) - f(eta)``, which keeps them continuous and matches the
closed forms.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from ._rng import batch_rng, batch_sizes, run_batches
from .billiard import (
    BranchPolicy,
    Termination,
    _advance,
    boundary_map,
    orbit,
    state_from_uv,
)
from .errors import (
    ExceptionalSet,
    InaccessibleLayer,
    NumericRangeError,
    OutOfRange,
    RootNotBracketed,
    WrongDomain,
)
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

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class FlatDisk:
    mu: float = 1.0
    alpha: float = 1.0

    @property
    def eta0(self):
        return self.alpha / self.mu


@dataclass(frozen=True)
class SphericalCut:
    alpha: float = 1.0
    beta: float = 1.0

    @property
    def eta0(self):
        # argument of the arcsin reaches 1
        a, b = self.alpha, self.beta
        cot = math.cos(b) / math.sin(b)
        return a / (b * math.sqrt(1.0 + cot * cot))

    def profile(self) -> "RadialProfile":
        b, a = self.beta, self.alpha
        return RadialProfile(mu=lambda r: b * r / np.sin(b * r), V=lambda r: a * a + 0.0 * r, mu0=1.0)


@dataclass(frozen=True)
class Cylinder:
    mu: float = 1.0
    alpha: float = 1.0

    @property
    def eta0(self):
        return self.alpha / self.mu


def f_closed(model, eta: float) -> float:
    """Closed-form rotation function.

    FlatDisk: ``mu pi - 2 mu arcsin(mu eta / alpha)``;
    SphericalCut: ``pi - 2 arcsin(beta eta cot(beta) / sqrt(alpha^2 - beta^2 eta^2))``;
    Cylinder: ``2 mu^2 eta / sqrt(alpha^2 - mu^2 eta^2)``.
    """
    if isinstance(model, FlatDisk):
        arg = model.mu * eta / model.alpha
        if abs(arg) > 1.0:
            raise OutOfRange(f"|mu eta / alpha| = {abs(arg):.6g} > 1")
        return model.mu * math.pi - 2.0 * model.mu * math.asin(arg)
    if isinstance(model, SphericalCut):
        a, b = model.alpha, model.beta
        rad = a * a - b * b * eta * eta
        if rad <= 0.0:
            raise OutOfRange("alpha^2 - beta^2 eta^2 must be positive")
        arg = b * eta * (math.cos(b) / math.sin(b)) / math.sqrt(rad)
        if abs(arg) > 1.0:
            raise OutOfRange(f"arcsin argument {arg:.6g} outside [-1, 1]")
        return math.pi - 2.0 * math.asin(arg)
    if isinstance(model, Cylinder):
        rad = model.alpha**2 - (model.mu * eta) ** 2
        if rad <= 0.0:
            raise OutOfRange("|mu eta| must be below alpha")
        return 2.0 * model.mu**2 * eta / math.sqrt(rad)
    raise TypeError(f"unknown model {model!r}")


def model_from_dict(obj: dict):
    kinds = {"flat_disk": FlatDisk, "spherical_cut": SphericalCut, "cylinder": Cylinder}
    kind = obj.get("model")
    if kind not in kinds:
        raise ValueError(f"model must be one of {sorted(kinds)}")
    return kinds[kind](**{k: float(v) for k, v in obj.items() if k != "model"})


# ---------------------------------------------------------------------------
# numeric rotation functions


class Mode(str, enum.Enum):
    HITS_INNER = "HitsInner"
    TURNS = "Turns"


@dataclass(frozen=True)
class RadialProfile:
    """Radial profile for the rotation integral.

    Parameters
    ----------
    mu, V : callable
        Vectorised positive functions on ``(0, 1]``.
    lam : callable, optional
        Speed profile; does not affect trajectories.
    geometry : {"polar", "cylinder"}
    r_inner : float
        Reflecting inner radius (polar) or 0.
    mu0 : float, optional
        ``mu(0+)``, used for ``f(0)``; defaults to ``mu`` at a tiny radius.
    """

    mu: Callable
    V: Callable
    lam: Callable | None = None
    geometry: str = "polar"
    r_inner: float = 0.0
    mu0: float | None = None

    @property
    def eta0(self) -> float:
        """Largest |eta| whose trajectories reach the outer wall."""
        return math.sqrt(float(self.V(1.0))) / float(self.mu(1.0))

    def g(self, r, eta):
        r = np.asarray(r, dtype=float)
        if self.geometry == "cylinder":
            return self.V(r) - self.mu(r) ** 2 * eta * eta
        return self.V(r) - self.mu(r) ** 2 * eta * eta / (r * r)

    def weight(self, r, eta):
        if self.geometry == "cylinder":
            return self.mu(r) ** 2 * eta
        return self.mu(r) ** 2 * eta / (r * r)


def constant_profile(mu: float = 1.0, alpha: float = 1.0, geometry: str = "polar", r_inner: float = 0.0) -> RadialProfile:
    return RadialProfile(
        mu=lambda r: mu + 0.0 * np.asarray(r, dtype=float),
        V=lambda r: alpha * alpha + 0.0 * np.asarray(r, dtype=float),
        geometry=geometry,
        r_inner=r_inner,
        mu0=mu,
    )


def turning_point(profile: RadialProfile, eta: float, n_scan: int = 4000) -> float:
    """Largest root of ``g(r) = 0`` below 1 by scan, bisection and Newton polish."""
    lo_lim = 0.0 if profile.geometry == "cylinder" else 1e-9
    if float(profile.g(1.0, eta)) <= 0.0:
        raise RootNotBracketed("trajectory does not reach the outer wall")
    grid = np.linspace(1.0, lo_lim, n_scan + 1)
    vals = profile.g(grid, eta)
    neg = np.nonzero(vals <= 0.0)[0]
    if neg.size == 0:
        raise RootNotBracketed("no turning point in (0, 1)")
    j = neg[0]
    lo, hi = float(grid[j]), float(grid[j - 1])  # g(lo) <= 0 < g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(profile.g(mid, eta)) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    r = 0.5 * (lo + hi)
    for _ in range(3):
        d = 1e-7 * max(r, 1e-3)
        gp = (float(profile.g(r + d, eta)) - float(profile.g(r - d, eta))) / (2 * d)
        if gp == 0.0:
            break
        rn = r - float(profile.g(r, eta)) / gp
        if not (lo - 1e-13 <= rn <= hi + 1e-13) or abs(rn - r) < 1e-16:
            break
        r = rn
    return r


def _f_integral(profile: RadialProfile, eta: float, lower: float, singular: bool) -> float:
    def integrand_r(r):
        g = float(profile.g(r, eta))
        return float(profile.weight(r, eta)) / math.sqrt(abs(g)) if g != 0.0 else 0.0

    if singular:
        S = math.sqrt(1.0 - lower)

        def integrand_s(s):
            r = lower + s * s
            g = abs(float(profile.g(r, eta)))
            if g == 0.0:
                return 0.0  # s below rounding of r; a null set for the quadrature
            return 2.0 * s * float(profile.weight(r, eta)) / math.sqrt(g)

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(integrand_s, 0.0, S, epsabs=1e-13, epsrel=1e-10, limit=400)
            except integrate.IntegrationWarning:
                # r1 near 1: g loses digits to cancellation; the integrand is smooth
                # in s, so a high-order Gauss rule averages the noise out
                x, w = np.polynomial.legendre.leggauss(256)
                sn = 0.5 * S * (x + 1.0)
                val = 0.5 * S * float(sum(wi * integrand_s(si) for wi, si in zip(w, sn)))
    else:
        val, _ = integrate.quad(integrand_r, lower, 1.0, epsabs=1e-13, epsrel=1e-10, limit=400)
    return 2.0 * val


def f_zero(profile: RadialProfile) -> float:
    """``f(0+)``: pi * mu(0+) for polar profiles, 0 for the cylinder."""
    if profile.geometry == "cylinder":
        return 0.0
    if profile.r_inner > 0.0:
        return 0.0
    mu0 = profile.mu0 if profile.mu0 is not None else float(profile.mu(1e-8))
    return math.pi * mu0


def f_numeric(profile: RadialProfile, eta: float, mode: Mode | str | None = None) -> float:
    """Rotation function by quadrature.

    ``mode`` selects the lower limit: the turning point (``Turns``) or the
    inner wall / symmetry plane (``HitsInner``).  ``None`` picks whichever
    the trajectory actually meets.
    """
    if abs(eta) > profile.eta0 * (1.0 + 1e-15):
        raise OutOfRange(f"|eta| = {abs(eta):.6g} exceeds the threshold {profile.eta0:.6g}")
    if profile.geometry == "polar" and eta < 0.0:
        return 2.0 * f_zero(profile) - f_numeric(profile, -eta, mode)
    if eta == 0.0:
        return f_zero(profile)
    inner = profile.r_inner if profile.geometry == "polar" else 0.0
    if mode is None:
        try:
            r1 = turning_point(profile, eta)
        except RootNotBracketed:
            r1 = -1.0
        mode = Mode.TURNS if r1 > inner else Mode.HITS_INNER
    mode = Mode(mode)
    if mode == Mode.TURNS:
        r1 = turning_point(profile, eta)
        return _f_integral(profile, eta, r1, True)
    if profile.geometry == "polar" and inner <= 0.0:
        raise RootNotBracketed("HitsInner needs an inner wall for polar profiles")
    if float(np.min(profile.g(np.linspace(max(inner, 1e-12), 1.0, 257), eta))) <= 0.0:
        raise RootNotBracketed("trajectory turns before reaching the inner wall")
    return _f_integral(profile, eta, inner, False)


# ---------------------------------------------------------------------------
# layered annuli


def _layer_bounds(layers: RadialLayers):
    return [(layers.outer_radius(k), layers.inner_radius(k), layers.speeds[k]) for k in range(layers.n_layers)]


def F_multi_annulus(layers: RadialLayers, eta: float, n: Sequence[int]) -> float:
    """Total central angle of ``n[k]`` segments in each layer k.

    A segment crosses layer k (inner to outer circle) when ``|eta| <= c_k r_k``
    and is a chord of the outer circle when ``c_k r_k < |eta| <= c_k R_k``.
    """
    if len(n) != layers.n_layers:
        raise ValueError("need one count per layer")
    total = 0.0
    for k, (R, r, c) in enumerate(_layer_bounds(layers)):
        nk = int(n[k])
        if nk == 0:
            continue
        if nk < 0:
            raise ValueError("counts must be non-negative")
        if abs(eta) > c * R:
            raise InaccessibleLayer(f"layer {k} is not reached at eta={eta}")
        if r > 0.0 and abs(eta) <= c * r:
            total += nk * (math.asin(eta / (r * c)) - math.asin(eta / (R * c)))
        else:
            total += nk * (math.pi - 2.0 * math.asin(eta / (R * c)))
    return total


def dF_multi_annulus(layers: RadialLayers, eta: float, n: Sequence[int]) -> float:
    """Analytic ``dF/deta``; unbounded near ``eta = c_k R_k`` and ``eta = c_k r_k``."""
    total = 0.0
    for k, (R, r, c) in enumerate(_layer_bounds(layers)):
        nk = int(n[k])
        if nk == 0:
            continue
        if abs(eta) >= c * R:
            raise InaccessibleLayer(f"layer {k} is not reached at eta={eta}")
        outer = 1.0 / math.sqrt((R * c) ** 2 - eta * eta)
        if r > 0.0 and abs(eta) < c * r:
            total += nk * (1.0 / math.sqrt((r * c) ** 2 - eta * eta) - outer)
        else:
            total += nk * (-2.0 * outer)
    return total


class BranchingRun(NamedTuple):
    angle: float
    counts: list
    eta_start: float
    eta_drift: float
    segments: int


def simulate_branching(layers: RadialLayers, eta: float, n_segments: int, theta0: float = 0.0, policy=BranchPolicy.REFRACT) -> BranchingRun:
    """Trace a layered orbit from the outer wall with conserved value ``eta``.

    Returns the unwrapped central angle swept, per-layer segment counts and
    the largest deviation of ``c_k (x ^ xi)`` from its initial value.
    """
    R0, c0 = layers.radii[0], layers.speeds[0]
    s = eta / (c0 * R0)
    if abs(s) >= 1.0:
        raise OutOfRange("eta must satisfy |eta| < c_0 R_0")
    p = (R0 * math.cos(theta0), R0 * math.sin(theta0))
    n_in = (-math.cos(theta0), -math.sin(theta0))
    t = (n_in[1], -n_in[0])  # counter-clockwise tangent
    cphi = math.sqrt(1.0 - s * s)
    xi = (cphi * n_in[0] + s * t[0], cphi * n_in[1] + s * t[1])
    x, layer = p, 0
    eta_start = c0 * (x[0] * xi[1] - x[1] * xi[0])
    counts = [0] * layers.n_layers
    angle, drift = 0.0, 0.0
    for _ in range(n_segments):
        hit, xi_out, new_layer, _ = _advance(layers, x, xi, layer, BranchPolicy(policy))
        q = hit.point
        dtheta = math.atan2(x[0] * q[1] - x[1] * q[0], x[0] * q[0] + x[1] * q[1])
        R, r, c = _layer_bounds(layers)[layer]
        chord = not (r > 0.0 and abs(eta) <= c * r)
        if chord and dtheta < 0.0 and eta > 0.0:
            dtheta += TWO_PI
        angle += dtheta
        counts[layer] += 1
        x, xi, layer = q, xi_out, new_layer
        cur = layers.speeds[layer] * (x[0] * xi[1] - x[1] * xi[0])
        drift = max(drift, abs(cur - eta_start))
    return BranchingRun(angle, counts, eta_start, drift, n_segments)


def rotation_empirical(domain: Domain, s0, bounces: int) -> float:
    """Mean central-angle advance per boundary-map step, increments in [0, 2 pi)."""
    if not isinstance(domain, (Disk, CircularAnnulus, RadialLayers)):
        raise WrongDomain("rotation_empirical needs a rotationally symmetric table")
    s = s0
    total = 0.0
    for _ in range(bounces):
        s1, _ = boundary_map(domain, s)
        a0 = math.atan2(s.p[1], s.p[0])
        a1 = math.atan2(s1.p[1], s1.p[0])
        total += (a1 - a0) % TWO_PI
        s = s1
    return total / bounces


# ---------------------------------------------------------------------------
# periodic-set measure


@dataclass(frozen=True)
class RotationProfile:
    """Sampled rotation function with derivative bounds on the interior."""

    eta: np.ndarray
    f: np.ndarray
    func: Callable | None = None
    dmin: float = field(default=float("nan"))
    dmax: float = field(default=float("nan"))

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if eta.ndim != 1 or eta.shape != f.shape or eta.size < 3:
            raise ValueError("eta and f must be 1-D of equal length >= 3")
        if np.any(np.diff(eta) <= 0):
            raise ValueError("eta grid must be strictly increasing")
        if not np.all(np.isfinite(f)):
            raise ValueError("f must be finite on the grid")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "f", f)
        d = np.abs(np.gradient(f, eta))
        inner = d[1:-1] if d.size > 4 else d
        object.__setattr__(self, "dmin", float(inner.min()))
        object.__setattr__(self, "dmax", float(inner.max()))

    @property
    def derivative(self) -> np.ndarray:
        return np.gradient(self.f, self.eta)


def rotation_profile(func: Callable[[float], float], lo: float, hi: float, n: int = 100001) -> RotationProfile:
    """Sample ``func`` on a uniform grid of ``n`` points in ``[lo, hi]``."""
    eta = np.linspace(lo, hi, n)
    vf = np.vectorize(func, otypes=[float])
    return RotationProfile(eta, vf(eta), func)


def periodic_levels(n: int, fmin: float, fmax: float) -> list[float]:
    """Distinct levels ``2 pi k / l`` with ``1 <= k, l <= n`` inside ``[fmin, fmax]``."""
    fr = {Fraction(k, l) for k in range(1, n + 1) for l in range(1, n + 1)}
    return sorted(TWO_PI * float(q) for q in fr if fmin <= TWO_PI * float(q) <= fmax)


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _preimage_measure(x, y, bands) -> float:
    """Measure of ``{t: y(t) in union(bands)}`` for piecewise-linear ``y``."""
    x0, x1 = x[:-1], x[1:]
    y0, y1 = y[:-1], y[1:]
    lo, hi = np.minimum(y0, y1), np.maximum(y0, y1)
    width = x1 - x0
    span = hi - lo
    flat = span == 0.0
    total = 0.0
    for a, b in bands:
        ov = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
        frac = np.where(flat, ((lo >= a) & (lo <= b)).astype(float), ov / np.where(flat, 1.0, span))
        total += float(np.sum(frac * width))
    return total


def periodic_measure_1d(profile: RotationProfile, n: int, eps: float, refine: int = 64) -> float:
    """Measure of ``{eta : |f(eta) - 2 pi k / l| <= eps for some k, l <= n}``.

    Exact for the piecewise-linear interpolant; when ``profile.func`` is set,
    cells touching a band are resampled ``refine`` times finer.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    f = profile.f
    levels = periodic_levels(n, float(f.min()) - eps, float(f.max()) + eps)
    if eps == 0.0 or not levels:
        return 0.0
    bands = _merge([(L - eps, L + eps) for L in levels])
    x, y = profile.eta, f
    if profile.func is None:
        return _preimage_measure(x, y, bands)
    lo, hi = np.minimum(y[:-1], y[1:]), np.maximum(y[:-1], y[1:])
    touch = np.zeros(lo.size, dtype=bool)
    for a, b in bands:
        touch |= (hi >= a) & (lo <= b)
    total = 0.0
    vf = np.vectorize(profile.func, otypes=[float])
    for i in np.nonzero(touch)[0]:
        xs = np.linspace(x[i], x[i + 1], refine + 1)
        ys = vf(xs)
        ys[0], ys[-1] = y[i], y[i + 1]
        total += _preimage_measure(xs, ys, bands)
    return total


def periodic_measure_bound(profile: RotationProfile, n: int, eps: float) -> float:
    """``2 eps * (#levels in range) / min|f'|``."""
    levels = periodic_levels(n, float(profile.f.min()), float(profile.f.max()))
    return 2.0 * eps * len(levels) / profile.dmin


# ---------------------------------------------------------------------------
# phase-space near-periodicity


class PhaseMeasure(NamedTuple):
    estimate: float
    stderr: float
    samples: int
    exceptional: int
    seed: int


def _boundary_scale(domain: Domain, u: np.ndarray) -> np.ndarray:
    """``|eta| / cos(phi)`` at arc parameter ``u`` (outer wall)."""
    if isinstance(domain, Ellipse):
        a, b = domain.a, domain.b
    elif isinstance(domain, ConfocalAnnulus):
        a, b = domain.a2, domain.b2
    elif isinstance(domain, (Disk, CircularAnnulus)):
        return np.full_like(u, 1.0 / domain.R)
    elif isinstance(domain, RadialLayers):
        return np.full_like(u, 1.0)
    else:
        return np.ones_like(u)
    return np.sqrt(np.cos(u) ** 2 / a**2 + np.sin(u) ** 2 / b**2)


def sample_boundary_states(domain: Domain, rng: np.random.Generator, count: int):
    """Draw ``(u, phi)`` with density proportional to ``|eta| du dv``."""
    P = domain.param_period
    out_u = np.empty(0)
    while out_u.size < count:
        u = rng.random(2 * count + 16) * P
        g = _boundary_scale(domain, u)
        acc = rng.random(u.size) * g.max() * 1.0000001 <= g
        out_u = np.concatenate([out_u, u[acc]])
    u = out_u[:count]
    phi = np.arcsin(2.0 * rng.random(count) - 1.0)
    return u, phi


def _near_return_batch(domain, T, eps, eps0, count, seed, index):
    rng = batch_rng(seed, 1, index)
    u, phi = sample_boundary_states(domain, rng, count)
    hits = exceptional = 0
    for ui, ph in zip(u, phi):
        try:
            p = domain.boundary_point(float(ui))
            n = domain.boundary_normal(p)
            v = math.atan2(n[1], n[0]) - float(ph)
            s0 = state_from_uv(domain, float(ui), v)
        except NumericRangeError:
            exceptional += 1
            continue
        rec = orbit(domain, PhasePoint(s0.p, s0.xi), max_bounces=10**6, max_time=T)
        found = False
        for st, t in zip(rec.states, rec.times):
            if t <= eps0:
                continue
            d = math.sqrt((st.p[0] - s0.p[0]) ** 2 + (st.p[1] - s0.p[1]) ** 2 + (st.xi[0] - s0.xi[0]) ** 2 + (st.xi[1] - s0.xi[1]) ** 2)
            if d <= eps:
                found = True
                break
        if found:
            hits += 1
        elif rec.termination in (Termination.CORNER, Termination.GRAZING):
            exceptional += 1
    return hits, exceptional


def near_periodic_phase_measure(
    domain: Domain,
    T: float,
    eps: float,
    samples: int,
    seed: int,
    eps0: float = 1e-9,
    threads: int = 1,
    batch: int = 1000,
) -> PhaseMeasure:
    """Fraction of boundary phase points returning within ``eps`` at a bounce time in ``(eps0, T]``.

    Points are drawn from the invariant boundary measure ``|eta| du dv``;
    distance is Euclidean in ``(x, xi)``.  Orbits ending at a corner or
    tangency without returning are excluded and counted in ``exceptional``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = batch_sizes(samples, batch)
    res = run_batches(lambda c, i: _near_return_batch(domain, T, eps, eps0, c, seed, i), [(c, i) for i, c in enumerate(sizes)], threads)
    hits = sum(r[0] for r in res)
    exc = sum(r[1] for r in res)
    valid = samples - exc
    if valid <= 0:
        return PhaseMeasure(float("nan"), float("nan"), samples, exc, seed)
    p = hits / valid
    se = math.sqrt(max(p * (1.0 - p), 0.0) / valid)
    return PhaseMeasure(p, se, samples, exc, seed)


# ---------------------------------------------------------------------------
# diophantine / monotonicity diagnostics


class DiophantineReport(NamedTuple):
    shared_sign: str | None  # "decreasing", "increasing" or None
    min_proxy: float
    argmin: tuple
    verdict: str


def _derivative_stack(profile: RotationProfile, K: int):
    ders = [profile.f]
    for _ in range(1, K):
        ders.append(np.gradient(ders[-1], profile.eta))
    return ders


def diophantine_check(profiles: Sequence[RotationProfile], n_max: int, K: int) -> DiophantineReport:
    """Monotonicity sign test and a derivative-sum scan over ``(n, q)``.

    All profiles must share one ``eta`` grid.  The scan evaluates, for
    ``0 <= n_j <= n_max`` (not all zero) and ``1 <= q <= K``, the minimum over
    the grid of ``sum_{k<K} |d^k/deta^k (sum_j n_j f_j - 2 pi q)|``.
    """
    signs = set()
    for pr in profiles:
        d = pr.derivative[1:-1]
        if np.all(d < 0):
            signs.add("decreasing")
        elif np.all(d > 0):
            signs.add("increasing")
        else:
            signs.add("mixed")
    shared = signs.pop() if len(signs) == 1 else None
    if shared == "mixed":
        shared = None
    eta = profiles[0].eta
    for pr in profiles[1:]:
        if pr.eta.shape != eta.shape or np.any(pr.eta != eta):
            raise ValueError("profiles must share one eta grid")
    stacks = [_derivative_stack(pr, K) for pr in profiles]
    best = (math.inf, ())
    for nvec in itertools.product(range(n_max + 1), repeat=len(profiles)):
        if not any(nvec):
            continue
        comb = [sum(nj * st[k] for nj, st in zip(nvec, stacks)) for k in range(K)]
        tail = sum(np.abs(c) for c in comb[1:]) if K > 1 else 0.0
        for q in range(1, K + 1):
            proxy = np.abs(comb[0] - TWO_PI * q) + tail
            i = int(np.argmin(proxy))
            if proxy[i] < best[0]:
                best = (float(proxy[i]), (nvec, q, float(eta[i])))
    if shared is not None:
        verdict = f"all functions {shared}: monotone criterion satisfied"
    else:
        verdict = f"no shared monotonicity; scan minimum {best[0]:.3e}"
    return DiophantineReport(shared, best[0], best[1], verdict)
