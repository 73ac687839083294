"""Two-term Weyl counting, residual analysis and the Robin boundary layer.

Weyl law for the 2-D Laplacian::

    N(lambda) ~ Area lambda / (4 pi)  -/+  Perimeter sqrt(lambda) / (4 pi)

with ``-`` for Dirichlet and ``+`` for Neumann conditions.

Robin layer (unit semiclassical parameter; the general case follows by
``x -> x / h``): the half-line operator ``D^2 + a'`` with ``u'(0) = -beta u(0)``
has for ``beta > 0`` the normalised bound state ``sqrt(2 beta) exp(-beta x)``
at energy ``a' - beta^2``.  Its spectral-projector kernel contributes
``2 beta exp(-beta (x + y))`` once ``tau >= a' - beta^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import NoSurfaceState, SpectrumTruncated
from .geometry import Domain
from .spectra_oracle import DIRICHLET, NEUMANN, Spectrum, _bc


@dataclass(frozen=True)
class WeylEstimate:
    kappa0_term: float
    kappa1_term: float
    bc: str
    lam: float

    @property
    def total(self) -> float:
        return self.kappa0_term + self.kappa1_term


def weyl_two_term(domain: Domain, lam: float, bc: str = DIRICHLET) -> WeylEstimate:
    """Two-term counting prediction at ``lam > 0``."""
    bc = _bc(bc)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    area, per = domain.metrics()
    k0 = area * lam / (4.0 * math.pi)
    k1 = per * math.sqrt(lam) / (4.0 * math.pi)
    return WeylEstimate(k0, -k1 if bc == DIRICHLET else k1, bc, lam)


def weyl_curve(area: float, perimeter: float, lam, bc: str = DIRICHLET):
    lam = np.asarray(lam, dtype=float)
    sgn = -1.0 if _bc(bc) == DIRICHLET else 1.0
    return area * lam / (4.0 * math.pi) + sgn * perimeter * np.sqrt(lam) / (4.0 * math.pi)


class ResidualTable(NamedTuple):
    lam: np.ndarray
    N: np.ndarray
    NW: np.ndarray
    R: np.ndarray
    Rnorm: np.ndarray
    one_term: np.ndarray  # N - Area lambda / 4 pi


class BlockStat(NamedTuple):
    lo: float
    hi: float
    median_abs_rnorm: float
    mean_one_term: float
    count: int


def residual_series(domain: Domain, spectrum: Spectrum, lam_grid) -> ResidualTable:
    """Counting function against the two-term law on ``lam_grid``."""
    lam = np.asarray(lam_grid, dtype=float)
    if lam.size and lam.max() > spectrum.guaranteed_up_to:
        raise SpectrumTruncated(
            f"grid reaches {lam.max():.6g} beyond the guaranteed {spectrum.guaranteed_up_to:.6g}"
        )
    area, per = domain.metrics()
    N = spectrum.counting(lam).astype(float)
    NW = weyl_curve(area, per, lam, spectrum.bc)
    R = N - NW
    with np.errstate(divide="ignore", invalid="ignore"):
        Rn = np.where(lam > 0, R / np.sqrt(lam), 0.0)
    return ResidualTable(lam, N, NW, R, Rn, N - area * lam / (4.0 * math.pi))


def dyadic_blocks(table: ResidualTable, lo: float, hi: float) -> list[BlockStat]:
    """Statistics on ``[lo 2^j, lo 2^{j+1})`` blocks covering ``[lo, hi]``."""
    out = []
    a = lo
    while a < hi * (1 - 1e-12):
        b = min(2.0 * a, hi)
        last = b >= hi * (1 - 1e-12)
        sel = (table.lam >= a) & ((table.lam <= b) if last else (table.lam < b))
        if np.any(sel):
            out.append(
                BlockStat(a, b, float(np.median(np.abs(table.Rnorm[sel]))), float(np.mean(table.one_term[sel])), int(sel.sum()))
            )
        a = b
    return out


def block_median(table: ResidualTable, lo: float, hi: float) -> float:
    sel = (table.lam >= lo) & (table.lam <= hi)
    return float(np.median(np.abs(table.Rnorm[sel])))


def residual_sup(domain: Domain, spectrum: Spectrum, lo: float, hi: float) -> float:
    """Exact ``sup |N - N^W| / sqrt(lambda)`` over ``[lo, hi]``.

    The two-term curve is continuous and increasing, so the extremes sit at
    the jumps of N (both one-sided values) and at the end points.
    """
    if hi > spectrum.guaranteed_up_to:
        raise SpectrumTruncated("interval exceeds the guaranteed range")
    area, per = domain.metrics()
    jumps = spectrum.values[(spectrum.values >= lo) & (spectrum.values <= hi)]
    pts = np.concatenate([[lo, hi], jumps])
    NW = weyl_curve(area, per, pts, spectrum.bc)
    right = spectrum.counting(pts) - NW
    left = spectrum.counting_left(pts) - NW
    left[0] = right[0]  # N(lo-) is outside the interval
    vals = np.maximum(np.abs(right), np.abs(left)) / np.sqrt(pts)
    return float(vals.max())


# ---------------------------------------------------------------------------
# Robin boundary layer


@dataclass(frozen=True)
class RobinLayer:
    beta: float
    a_prime: float
    tau: float

    @property
    def energy(self) -> float:
        return self.a_prime - self.beta**2


def bound_state(beta: float, x):
    """Normalised surface state ``sqrt(2 beta) exp(-beta x)`` and its first two derivatives."""
    if not beta > 0:
        raise NoSurfaceState("a surface state needs beta > 0")
    x = np.asarray(x, dtype=float)
    u = math.sqrt(2.0 * beta) * np.exp(-beta * x)
    return u, -beta * u, beta * beta * u


def bound_state_residual(layer: RobinLayer, x):
    """ODE residual ``-u'' + a' u - E u`` and boundary residual ``u'(0) + beta u(0)``."""
    u, du, d2u = bound_state(layer.beta, x)
    ode = -d2u + layer.a_prime * u - layer.energy * u
    u0, du0, _ = bound_state(layer.beta, 0.0)
    return ode, float(du0 + layer.beta * u0)


def robin_surface_density(layer: RobinLayer, x1, y1):
    """Surface-state part of the half-line spectral-projector kernel at energy ``tau``."""
    if not layer.beta > 0:
        raise NoSurfaceState("a surface state needs beta > 0")
    x1 = np.asarray(x1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    if layer.tau < layer.energy:
        val = np.zeros(np.broadcast(x1, y1).shape)
    else:
        val = 2.0 * layer.beta * np.exp(-layer.beta * (x1 + y1))
    return float(val) if val.ndim == 0 else val


def _indicator(E, B, tau1, tau2):
    return (E > tau1) & (E <= tau2) & (B > 0)


def _row_measure(a_field, b_field, q, x, xi_lo, xi_hi, tau1, tau2, n_xi, gl_nodes, gl_weights):
    xi = np.linspace(xi_lo, xi_hi, n_xi + 1)
    xs = np.full_like(xi, x)
    E = a_field(xs, xi) - b_field(xs, xi) ** 2
    B = b_field(xs, xi)
    funcs = (
        (E - tau1, lambda t: float(a_field(x, t) - b_field(x, t) ** 2 - tau1)),
        (E - tau2, lambda t: float(a_field(x, t) - b_field(x, t) ** 2 - tau2)),
        (B, lambda t: float(b_field(x, t))),
    )
    breaks = [xi_lo, xi_hi]
    for vals, fn in funcs:
        vals = np.broadcast_to(vals, xi.shape)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in idx:
            breaks.append(optimize.brentq(fn, xi[i], xi[i + 1], xtol=1e-15, rtol=1e-15))
    breaks = np.unique(breaks)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        Em = float(a_field(x, m) - b_field(x, m) ** 2)
        if not _indicator(Em, float(b_field(x, m)), tau1, tau2):
            continue
        if q is None:
            total += b - a
        else:
            t = 0.5 * (b - a) * gl_nodes + m
            total += 0.5 * (b - a) * float(np.sum(gl_weights * q(np.full_like(t, x), t)))
    return total


def _vectorise(field):
    if callable(field):
        def f(x, xi):
            val = field(x, xi)
            return np.broadcast_to(np.asarray(val, dtype=float), np.broadcast(np.asarray(x), np.asarray(xi)).shape) if np.ndim(val) == 0 else val
        return f
    c = float(field)
    return lambda x, xi: np.full(np.broadcast(np.asarray(x), np.asarray(xi)).shape, c) if np.ndim(x) or np.ndim(xi) else c


def robin_kappa1(
    a_prime: Callable | float,
    beta: Callable | float,
    tau1: float,
    tau2: float,
    window: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0),
    q: Callable | None = None,
    n_xi: int = 400,
    tol: float = 1e-11,
) -> float:
    """Boundary-layer coefficient ``(2 pi)^-1 int [tau1 < a' - beta^2 <= tau2] [beta > 0] q dx dxi``.

    Each row ``x = const`` is integrated exactly: level crossings of
    ``a' - beta^2 - tau_j`` and of ``beta`` are located by sign scan on
    ``n_xi`` cells and Brent refinement, and ``q`` is integrated by
    Gauss-Legendre on each piece.  The row measure is then integrated in
    ``x`` by adaptive Gauss-Kronrod (it has square-root kinks where a level
    set is tangent to a row).
    """
    if tau2 < tau1:
        raise ValueError("need tau1 <= tau2")
    af, bf = _vectorise(a_prime), _vectorise(beta)
    qf = None if q is None else _vectorise(q)
    x_lo, x_hi, xi_lo, xi_hi = window
    nodes, weights = np.polynomial.legendre.leggauss(12)

    def row(x):
        return _row_measure(af, bf, qf, x, xi_lo, xi_hi, tau1, tau2, n_xi, nodes, weights)

    out = integrate.quad(row, x_lo, x_hi, epsabs=tol, epsrel=tol, limit=500, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and err > 1e-8:
        warnings.warn(f"kappa1 quadrature error estimate {err:.2e}: {out[3]}", RuntimeWarning, stacklevel=2)
    return val / (2.0 * math.pi)


def field_from_json(value) -> Callable:
    """Field from a JSON value: a number or a numpy expression in ``x`` and ``xi``."""
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError("field must be a number or an expression string")
    code = compile(value, "<field>", "eval")
    allowed = {name for name in dir(np) if not name.startswith("_")}
    for name in code.co_names:
        if name not in allowed and name not in ("x", "xi", "np"):
            raise ValueError(f"name {name!r} not allowed in field expression")
    env = {"__builtins__": {}, "np": np, **{n: getattr(np, n) for n in ("sin", "cos", "exp", "sqrt", "tanh", "abs", "pi", "log", "where", "minimum", "maximum")}}

    def f(x, xi):
        return eval(code, env, {"x": np.asarray(x, dtype=float), "xi": np.asarray(xi, dtype=float)})

    return f
