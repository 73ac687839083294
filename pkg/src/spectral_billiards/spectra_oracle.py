"""Exact Laplacian spectra of the disk, the rectangle and the circular annulus.

Eigenvalues are returned as a :class:`Spectrum` with one entry per separated
mode ``(m, k)`` and its multiplicity.  Counting is closed: an eigenvalue equal
to ``lambda`` is counted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bessel import jn_all, jy_all
from .errors import SpectrumTruncated

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


class ScanResolutionWarning(UserWarning):
    """Two roots shared a scan cell; the scan was refined."""


def _bc(bc: str) -> str:
    b = str(bc).lower()
    if b not in (DIRICHLET, NEUMANN):
        raise ValueError("bc must be 'dirichlet' or 'neumann'")
    return b


@dataclass(frozen=True)
class Spectrum:
    """Distinct separated modes with multiplicities, sorted by eigenvalue.

    Attributes
    ----------
    values : ndarray
        Eigenvalue of each mode.
    multiplicity : ndarray of int
    m, k : ndarray of int
        Angular order and radial index (for rectangles: the two wave numbers).
    guaranteed_up_to : float
        The list is complete for eigenvalues at or below this value.
    bc : str
    """

    values: np.ndarray
    multiplicity: np.ndarray
    m: np.ndarray
    k: np.ndarray
    guaranteed_up_to: float
    bc: str = DIRICHLET
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = np.lexsort((self.k, self.m, self.values))
        for name in ("values", "multiplicity", "m", "k"):
            object.__setattr__(self, name, np.asarray(getattr(self, name))[order])
        object.__setattr__(self, "_cum", np.cumsum(self.multiplicity))

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.repeat(self.values, self.multiplicity)

    def counting(self, lam, check: bool = True):
        """Closed counting function N(lam) = #{lambda_j <= lam}."""
        lam_arr = np.asarray(lam, dtype=float)
        if check and np.any(lam_arr > self.guaranteed_up_to):
            raise SpectrumTruncated(
                f"lambda={float(np.max(lam_arr)):.6g} exceeds guaranteed range {self.guaranteed_up_to:.6g}"
            )
        idx = np.searchsorted(self.values, lam_arr, side="right")
        cum = np.concatenate([[0], self._cum])
        res = cum[idx]
        return int(res) if np.ndim(lam) == 0 else res

    def counting_left(self, lam):
        """Left limit N(lam-) = #{lambda_j < lam}."""
        idx = np.searchsorted(self.values, np.asarray(lam, dtype=float), side="left")
        cum = np.concatenate([[0], self._cum])
        res = cum[idx]
        return int(res) if np.ndim(lam) == 0 else res


def counting(spectrum: Spectrum, lam) -> int:
    """#{lambda_j <= lam} with multiplicity; raises SpectrumTruncated past the guarantee."""
    return spectrum.counting(lam)


def _guarantee(values: np.ndarray, lambda_max: float) -> float:
    distinct = np.unique(values)
    if distinct.size < 2:
        return lambda_max
    return float(lambda_max - (distinct[-1] - distinct[-2]))


# ---------------------------------------------------------------------------
# disk


def _bisect_brackets(fun, lo, hi, tol=1e-14, max_iter=200):
    """Vectorised bisection; ``fun(x)`` returns values for every bracket."""
    flo = fun(lo)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _disk_fun(orders, x, bc):
    """J_m(x) (Dirichlet) or J_m'(x) (Neumann) for paired (orders, x)."""
    M = int(orders.max()) + 1
    J = jn_all(M, x)
    cols = np.arange(x.size)
    if bc == DIRICHLET:
        return J[orders, cols]
    prev = np.where(orders > 0, J[np.maximum(orders - 1, 0), cols], -J[1, cols])
    nxt = J[orders + 1, cols]
    return np.where(orders > 0, 0.5 * (prev - nxt), prev)


def disk_zeros(m_max: int, x_max: float, bc: str = DIRICHLET, step: float = 0.1):
    """All positive zeros <= x_max of J_m (or J_m') for m <= m_max.

    Returns arrays ``(m, k, x)`` with k the 1-based zero index per order.
    """
    bc = _bc(bc)
    grid = np.arange(step * 0.5, x_max + 2 * step, step)
    J = jn_all(m_max + 1, grid)
    if bc == DIRICHLET:
        F = J[: m_max + 1]
    else:
        F = np.empty((m_max + 1, grid.size))
        F[0] = -J[1]
        F[1:] = 0.5 * (J[: m_max] - J[2 : m_max + 2])
    s = np.sign(F)
    mm, ii = np.nonzero(s[:, :-1] * s[:, 1:] <= 0)
    # an exact zero at a grid node would register twice
    keep = ~((s[mm, ii] == 0) & (ii > 0))
    mm, ii = mm[keep], ii[keep]
    if mm.size == 0:
        return np.zeros(0, int), np.zeros(0, int), np.zeros(0)
    lo, hi = grid[ii], grid[ii + 1]
    roots = _bisect_brackets(lambda x: _disk_fun(mm, x, bc), lo, hi)
    sel = roots <= x_max
    mm, roots = mm[sel], roots[sel]
    order = np.lexsort((roots, mm))
    mm, roots = mm[order], roots[order]
    k = np.zeros_like(mm)
    for m in np.unique(mm):
        idx = np.nonzero(mm == m)[0]
        k[idx] = np.arange(1, idx.size + 1)
    return mm, k, roots


def disk_spectrum(R: float, lambda_max: float, bc: str = DIRICHLET) -> Spectrum:
    """Disk eigenvalues ``(j_{m,k} / R)^2`` up to ``lambda_max``.

    Dirichlet uses zeros of J_m, Neumann zeros of J_m' plus the constant mode
    ``lambda = 0``.  Modes with m >= 1 have multiplicity 2.
    """
    bc = _bc(bc)
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    x_max = math.sqrt(lambda_max) * R
    m_max = int(math.ceil(x_max)) + 1  # first zero of J_m and J_m' exceeds m
    mm, kk, xx = disk_zeros(m_max, x_max, bc)
    vals = (xx / R) ** 2
    mult = np.where(mm > 0, 2, 1)
    if bc == NEUMANN:
        vals = np.concatenate([[0.0], vals])
        mult = np.concatenate([[1], mult])
        mm = np.concatenate([[0], mm])
        kk = np.concatenate([[0], kk])
    return Spectrum(vals, mult, mm, kk, _guarantee(vals, lambda_max), bc)


def rect_spectrum(Lx: float, Ly: float, lambda_max: float, bc: str = DIRICHLET) -> Spectrum:
    """Rectangle eigenvalues ``(m pi/Lx)^2 + (n pi/Ly)^2`` up to ``lambda_max``."""
    bc = _bc(bc)
    if not (Lx > 0 and Ly > 0):
        raise ValueError("side lengths must be positive")
    start = 1 if bc == DIRICHLET else 0
    mmax = int(math.sqrt(lambda_max) * Lx / math.pi) + 1
    nmax = int(math.sqrt(lambda_max) * Ly / math.pi) + 1
    m, n = np.meshgrid(np.arange(start, mmax + 1), np.arange(start, nmax + 1), indexing="ij")
    vals = (m * math.pi / Lx) ** 2 + (n * math.pi / Ly) ** 2
    sel = vals <= lambda_max
    m, n, vals = m[sel], n[sel], vals[sel]
    return Spectrum(vals, np.ones(vals.size, int), m, n, _guarantee(vals, lambda_max), bc)


# ---------------------------------------------------------------------------
# annulus


def annulus_cross(m: np.ndarray, k: np.ndarray, R: float, r: float) -> np.ndarray:
    """Normalised cross product ``(J_m(kr)Y_m(kR) - J_m(kR)Y_m(kr)) / max(1, |Y_m(kr)|)``."""
    m = np.asarray(m, dtype=int)
    k = np.asarray(k, dtype=float)
    M = int(m.max())
    cols = np.arange(k.size)
    Jr, Yr = jy_all(M, k * r)
    JR, YR = jy_all(M, k * R)
    jr, yr, jR, yR = Jr[m, cols], Yr[m, cols], JR[m, cols], YR[m, cols]
    scale = np.maximum(1.0, np.abs(yr))
    with np.errstate(invalid="ignore", over="ignore"):
        val = jr * (yR / scale) - jR * (yr / scale)
    # |Y_m(kr)| overflowed: the limit is -J_m(kR) sign(Y_m(kr)) = J_m(kR)
    return np.where(np.isfinite(yr), val, jR)


def _annulus_roots_for_order(m, R, r, k_end, h):
    k0 = max(m / R, 1e-6)
    if k0 >= k_end:
        return np.zeros(0), np.zeros(0)
    n = max(2, int(math.ceil((k_end - k0) / h)) + 1)
    grid = np.linspace(k0, k_end, n)
    g = annulus_cross(np.full(grid.size, m), grid, R, r)
    s = np.sign(g)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return grid[idx], grid[idx + 1]


def annulus_spectrum(R: float, r: float, lambda_max: float, bc: str = DIRICHLET) -> Spectrum:
    """Dirichlet eigenvalues ``k^2`` of the annulus ``r < |x| < R``.

    Roots of the cross product are located by a sign-change scan with cell
    ``pi / (4 (R - r))`` starting at ``k = m / R``; the scan is halved until
    the root count stops changing, with a :class:`ScanResolutionWarning`
    whenever a refinement found new roots.
    """
    if _bc(bc) != DIRICHLET:
        raise ValueError("annulus spectrum is implemented for Dirichlet only")
    if not R > r > 0:
        raise ValueError("need R > r > 0")
    k_max = math.sqrt(lambda_max)
    m_max = int(math.ceil(k_max * R)) + 1
    h0 = math.pi / (4.0 * (R - r))
    k_end = k_max + 2.0 * h0
    all_m, all_lo, all_hi = [], [], []
    for m in range(m_max + 1):
        h = h0
        lo, hi = _annulus_roots_for_order(m, R, r, k_end, h)
        while True:
            lo2, hi2 = _annulus_roots_for_order(m, R, r, k_end, 0.5 * h)
            if lo2.size == lo.size:
                break
            warnings.warn(
                f"order {m}: scan cell {h:.3g} merged roots, refining", ScanResolutionWarning, stacklevel=2
            )
            h *= 0.5
            lo, hi = lo2, hi2
        if lo.size == 0 and m > 0 and m / R > k_max:
            break
        all_m.append(np.full(lo.size, m))
        all_lo.append(lo)
        all_hi.append(hi)
    mm = np.concatenate(all_m) if all_m else np.zeros(0, int)
    lo = np.concatenate(all_lo) if all_lo else np.zeros(0)
    hi = np.concatenate(all_hi) if all_hi else np.zeros(0)
    if mm.size:
        roots = _bisect_brackets(lambda k: annulus_cross(mm, k, R, r), lo, hi)
    else:
        roots = np.zeros(0)
    sel = roots <= k_max
    mm, roots = mm[sel], roots[sel]
    order = np.lexsort((roots, mm))
    mm, roots = mm[order], roots[order]
    kk = np.zeros_like(mm)
    for m in np.unique(mm):
        idx = np.nonzero(mm == m)[0]
        kk[idx] = np.arange(1, idx.size + 1)
    vals = roots**2
    mult = np.where(mm > 0, 2, 1)
    return Spectrum(vals, mult, mm, kk, _guarantee(vals, lambda_max), DIRICHLET)
