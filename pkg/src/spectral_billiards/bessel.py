"""Integer-order Bessel functions J_m and Y_m for real x > 0.

J is evaluated for all orders at once by Miller's downward recurrence,
normalised with ``1 = J_0 + 2 sum_k J_{2k}``.  Y_0 and Y_1 follow from the
Neumann series in even/odd J orders and higher Y orders from the (stable)
upward recurrence.  Everything is vectorised over ``x``.

Accuracy is absolute, about 1e-15 times the local envelope
``sqrt(2 / (pi x))``, which is what zero finding needs.
"""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329
_BIG = 1e200


def miller_start(m_max: int, x_max: float) -> int:
    """Even start order for the downward recurrence.

    The margin ``m + 20 + ceil(x)`` alone loses digits near x ~ 50-100, so a
    ``sqrt`` term proportional to the transition-zone width is added.
    """
    n = max(m_max, int(math.ceil(x_max))) + 20 + int(math.ceil(6.0 * max(x_max, 1.0) ** (1.0 / 3.0)))
    n += int(math.ceil(math.sqrt(40.0 * max(m_max, x_max, 1.0))))
    return n + (n % 2)


def jn_all(m_max: int, x) -> np.ndarray:
    """``J_0..J_{m_max}`` at every ``x``; shape ``(m_max + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.reshape(-1)
    out = np.zeros((m_max + 1, xf.size))
    if xf.size == 0:
        return out.reshape((m_max + 1,) + shape)
    zero = xf == 0.0
    if np.any(xf < 0):
        raise ValueError("jn_all requires x >= 0")
    xs = np.where(zero, 1.0, xf)
    N = miller_start(m_max, float(xs.max()))

    j_next = np.zeros_like(xs)  # J_{k+1}
    j_cur = np.full_like(xs, 1e-300)  # J_k, k = N
    norm = np.zeros_like(xs)
    store = np.zeros((m_max + 1, xs.size))
    if N <= m_max:
        store[N] = j_cur
    for k in range(N, 0, -1):
        j_prev = (2.0 * k / xs) * j_cur - j_next  # J_{k-1}
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if k - 1 <= m_max:
            store[k - 1] = j_cur
        big = np.abs(j_cur) > _BIG
        if np.any(big):
            scale = np.where(big, 1.0 / _BIG, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            store *= scale
    norm += j_cur  # J_0 term
    out[:] = store / norm
    if np.any(zero):
        out[:, zero] = 0.0
        out[0, zero] = 1.0
    return out.reshape((m_max + 1,) + shape)


def _y01(x, J):
    """Y_0 and Y_1 from Neumann series given J orders 0..K (K large enough)."""
    K = J.shape[0] - 1
    lg = np.log(0.5 * x) + EULER_GAMMA
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    for k in range(1, K // 2):
        sgn = -1.0 if k % 2 else 1.0
        s0 += sgn * J[2 * k] / k
        s1 += sgn * (J[2 * k - 1] - J[2 * k + 1]) / (2.0 * k)
    y0 = (2.0 / math.pi) * (lg * J[0] - 2.0 * s0)
    # Y1 = -Y0'
    y1 = -(2.0 / math.pi) * (J[0] / x - lg * J[1] - 2.0 * s1)
    return y0, y1


def jy_all(m_max: int, x) -> tuple[np.ndarray, np.ndarray]:
    """``(J, Y)`` for orders ``0..m_max`` at ``x > 0``.

    Y entries that overflow are returned as ``-inf`` (Y_m -> -inf as x -> 0).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Y_m requires x > 0")
    shape = x.shape
    xf = x.reshape(-1)
    K = max(m_max + 2, miller_start(0, float(xf.max()) if xf.size else 1.0))
    Jall = jn_all(K, xf)
    y = np.empty((m_max + 1, xf.size))
    y0, y1 = _y01(xf, Jall)
    y[0] = y0
    if m_max >= 1:
        y[1] = y1
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(1, m_max):
            y[m + 1] = (2.0 * m / xf) * y[m] - y[m - 1]
    y[~np.isfinite(y)] = -np.inf
    J = Jall[: m_max + 1]
    return J.reshape((m_max + 1,) + shape), y.reshape((m_max + 1,) + shape)


def bessel(kind: str, m: int, x):
    """J_m(x) or Y_m(x) for integer ``m >= 0``.

    Parameters
    ----------
    kind : {"J", "Y"}
    m : int
    x : float or array_like
        ``x >= 0`` for J, ``x > 0`` for Y.
    """
    if m < 0:
        raise ValueError("order must be non-negative")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if kind.upper() == "J":
        val = jn_all(m, xa)[m]
    elif kind.upper() == "Y":
        val = jy_all(m, xa)[1][m]
    else:
        raise ValueError("kind must be 'J' or 'Y'")
    return float(val[0]) if scalar else val


def bessel_derivative(kind: str, m: int, x):
    """d/dx of J_m or Y_m via ``C_m' = (C_{m-1} - C_{m+1}) / 2``."""
    if m == 0:
        return -bessel(kind, 1, x)
    return 0.5 * (bessel(kind, m - 1, x) - bessel(kind, m + 1, x))
