"""
Spherical Bessel, Neumann and Hankel functions of real argument.

All evaluators accept a scalar order ``n >= 0`` and an array-like argument
``x``; the result has the shape of ``x``.  Values are produced by
recurrences rather than by calls into a special-function library:

* ``x <= 1``: power series for ``j_n`` (no cancellation for small ``x``).
* ``x > n``: upward recurrence from the closed forms of ``j_0`` and ``j_1``.
* ``1 < x <= n``: Miller's downward recurrence, normalised against whichever
  of ``j_0``, ``j_1`` is larger in magnitude at ``x``.
* ``y_n`` always by upward recurrence, which is stable for the Neumann
  function.

``h_n^{(1)}`` is assembled as ``j_n + i y_n``; it is never computed
independently.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ROOT_TOL",
    "MAX_ORDER",
    "BesselZero",
    "sph_jn_all",
    "sph_yn_all",
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel1",
    "sph_bessel_dj",
    "sph_bessel_dy",
    "sph_hankel1_d",
    "riccati_j",
    "riccati_j_d",
    "riccati_h",
    "riccati_h_d",
    "bessel_j_zeros",
]

#: Absolute tolerance on ``|j_n(x)|`` accepted for a located zero.
ROOT_TOL = 1e-13

#: Largest order the library promises accuracy for.
MAX_ORDER = 64

_SERIES_X = 1.0
_SERIES_TERMS = 12
_RESCALE_AT = 1e200


def _check_order(n):
    if int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds supported maximum {MAX_ORDER}")
    return int(n)


def _as_real(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise ValueError("argument must be finite and non-negative")
    return x


def _series_all(nmax, x):
    # j_n(x) = x^n/(2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+3)...(2n+2k+1))
    n = np.arange(nmax + 1).reshape((-1,) + (1,) * x.ndim)
    pref = np.cumprod(np.concatenate([np.ones((1,) + x.shape), np.broadcast_to(x / (2 * n[1:] + 1), (nmax,) + x.shape)]), axis=0)
    half = -0.5 * x * x
    term = np.ones((nmax + 1,) + x.shape)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * half / (k * (2 * n + 2 * k + 1))
        total += term
    return pref * total


def _upward_all(nmax, x):
    out = np.empty((nmax + 1,) + x.shape)
    s, c = np.sin(x), np.cos(x)
    out[0] = s / x
    if nmax >= 1:
        out[1] = (s - x * c) / (x * x)
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def _miller_start(nmax, xmax):
    big = max(nmax, int(np.ceil(xmax)))
    return big + 30 + int(np.sqrt(40.0 * big))


def _miller_all(nmax, x):
    start = _miller_start(nmax, float(np.max(x)))
    out = np.zeros((nmax + 1,) + x.shape)
    f_up = np.zeros_like(x)
    f = np.full_like(x, 1e-30)
    for k in range(start, 0, -1):
        # f holds j_k (unnormalised), f_up holds j_{k+1}
        if k <= nmax:
            out[k] = f
        f_down = (2 * k + 1) / x * f - f_up
        f_up, f = f, f_down
        big = np.abs(f) > _RESCALE_AT
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            f = f * scale
            f_up = f_up * scale
            out[k:] *= scale
    out[0] = f
    j0 = np.sin(x) / x
    j1 = (np.sin(x) - x * np.cos(x)) / (x * x)
    if nmax == 0:
        return out * (j0 / out[0])
    use_j0 = np.abs(j0) >= np.abs(j1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(use_j0, j0 / out[0], j1 / out[1])
    return out * norm


def _jn_table(nmax, x):
    flat = x.reshape(-1)
    out = np.empty((nmax + 1, flat.size))
    small = flat <= _SERIES_X
    up = (~small) & (flat > nmax)
    mid = (~small) & (~up)
    if np.any(small):
        out[:, small] = _series_all(nmax, flat[small])
    if np.any(up):
        out[:, up] = _upward_all(nmax, flat[up])
    if np.any(mid):
        out[:, mid] = _miller_all(nmax, flat[mid])
    return out.reshape((nmax + 1,) + x.shape)


def sph_jn_all(nmax, x):
    """
    ``j_0(x), ..., j_nmax(x)`` stacked along a new leading axis.

    Parameters
    ----------
    nmax : int
        Highest order, ``0 <= nmax <= MAX_ORDER``.
    x : array_like
        Non-negative real arguments; ``x = 0`` returns the analytic limit.

    Returns
    -------
    ndarray of shape ``(nmax + 1,) + np.shape(x)``
    """
    return _jn_table(_check_order(nmax), _as_real(x))


def sph_yn_all(nmax, x):
    """``y_0(x), ..., y_nmax(x)`` by upward recurrence; ``-inf`` at ``x = 0``."""
    nmax = _check_order(nmax)
    x = _as_real(x)
    out = np.empty((nmax + 1,) + x.shape)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s, c = np.sin(x), np.cos(x)
        out[0] = -c / x
        if nmax >= 1:
            out[1] = -c / (x * x) - s / x
        for n in range(1, nmax):
            out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
        out[:, x == 0] = -np.inf
    return out


def _strict_positive(x):
    x = _as_real(x)
    if np.any(x <= 0):
        raise ValueError("argument must be strictly positive")
    return x


def sph_bessel_j(n, x):
    """Spherical Bessel function of the first kind ``j_n(x)``."""
    return sph_jn_all(n, x)[n]


def sph_bessel_y(n, x):
    """Spherical Neumann function ``y_n(x)``."""
    return sph_yn_all(n, x)[n]


def sph_hankel1(n, x):
    """
    Spherical Hankel function of the first kind, ``j_n(x) + i y_n(x)``.

    Raises
    ------
    ValueError
        If any ``x <= 0``.
    """
    x = _strict_positive(x)
    return sph_bessel_j(n, x) + 1j * sph_bessel_y(n, x)


def _derivative(vals, n, x):
    # f'_n = f_{n-1} - (n+1)/x f_n ;  f'_0 = -f_1
    if n == 0:
        return -vals[1]
    return vals[n - 1] - (n + 1) / x * vals[n]


def sph_bessel_dj(n, x):
    """Derivative ``j_n'(x)``; analytic limit at ``x = 0``."""
    n = _check_order(n)
    x = _as_real(x)
    vals = _jn_table(max(n, 1), x)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = _derivative(vals, n, x)
    at_zero = 1.0 / 3.0 if n == 1 else 0.0
    return np.where(x == 0, at_zero, d)


def sph_bessel_dy(n, x):
    """Derivative ``y_n'(x)`` for ``x > 0``."""
    n = _check_order(n)
    x = _strict_positive(x)
    vals = sph_yn_all(max(n, 1), x)
    return _derivative(vals, n, x)


def sph_hankel1_d(n, x):
    """Derivative of ``h_n^{(1)}``, assembled from ``j_n'`` and ``y_n'``."""
    x = _strict_positive(x)
    return sph_bessel_dj(n, x) + 1j * sph_bessel_dy(n, x)


def riccati_j(n, x):
    """Riccati-Bessel ``psi_n(x) = x j_n(x)``."""
    x = _as_real(x)
    return x * sph_bessel_j(n, x)


def riccati_j_d(n, x):
    """``psi_n'(x) = j_n(x) + x j_n'(x)``."""
    x = _as_real(x)
    return sph_bessel_j(n, x) + x * sph_bessel_dj(n, x)


def riccati_h(n, x):
    """Riccati-Hankel ``xi_n(x) = x h_n^{(1)}(x)``."""
    x = _strict_positive(x)
    return x * sph_hankel1(n, x)


def riccati_h_d(n, x):
    """``xi_n'(x) = h_n(x) + x h_n'(x)``."""
    x = _strict_positive(x)
    return sph_hankel1(n, x) + x * sph_hankel1_d(n, x)


@dataclass(frozen=True)
class BesselZero:
    """The ``k``-th positive zero ``x`` of ``j_n``."""

    n: int
    k: int
    x: float


def _j_scalar(x, n):
    # Same three regimes as _jn_table, in plain floats for the root finder.
    if x <= _SERIES_X:
        return float(_series_all(n, np.array([x]))[n, 0])
    s, c = math.sin(x), math.cos(x)
    j0 = s / x
    if n == 0:
        return j0
    j1 = (s - x * c) / (x * x)
    if x > n:
        a, b = j0, j1
        for k in range(1, n):
            a, b = b, (2 * k + 1) / x * b - a
        return b
    f_up, f, keep, f1 = 0.0, 1e-30, 0.0, 0.0
    for k in range(_miller_start(n, x), 0, -1):
        if k == n:
            keep = f
        if k == 1:
            f1 = f
        f, f_up = (2 * k + 1) / x * f - f_up, f
        if abs(f) > _RESCALE_AT:
            f, f_up, keep, f1 = f / _RESCALE_AT, f_up / _RESCALE_AT, keep / _RESCALE_AT, f1 / _RESCALE_AT
    if abs(j0) >= abs(j1):
        return keep * j0 / f
    return keep * j1 / f1


@lru_cache(maxsize=256)
def _zeros_below(n, x_limit):
    # Zeros of j_n in (0, x_limit], bracketed by the interlacing
    # j_{n-1} zero < j_n zero < next j_{n-1} zero, seeded from k*pi.
    reach = x_limit + (n + 2) * np.pi
    prev = [k * np.pi for k in range(1, int(reach / np.pi) + 2)]
    for order in range(1, n + 1):
        cap = x_limit + (n - order + 1) * np.pi
        cur = []
        for a, b in zip(prev[:-1], prev[1:]):
            if a > cap:
                break
            cur.append(brentq(_j_scalar, a, b, args=(order,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
        prev = cur
    return tuple(z for z in prev if z <= x_limit)


def bessel_j_zeros(n, count, x_max, tol=None):
    """
    Positive zeros of ``j_n`` below ``x_max``.

    Parameters
    ----------
    n : int
        Order (``n = 0`` gives ``k*pi``).
    count : int
        Maximum number of zeros to return, ``>= 1``.
    x_max : float
        Upper end of the search interval.
    tol : float, optional
        Required ``|j_n(x)|`` at each zero; defaults to :data:`ROOT_TOL`.

    Returns
    -------
    list of BesselZero
        Ascending; shorter than ``count`` when ``x_max`` truncates.
    """
    n = _check_order(n)
    if count < 1:
        raise ValueError("count must be >= 1")
    if not x_max > 0:
        return []
    tol = ROOT_TOL if tol is None else tol
    zeros = _zeros_below(n, float(x_max))[:count]
    out = []
    for k, z in enumerate(zeros, start=1):
        val = abs(_j_scalar(z, n))
        if val > tol:
            raise ArithmeticError(f"zero {k} of j_{n} not resolved: |j_n(x)| = {val:.3e} > {tol:.1e}")
        out.append(BesselZero(n=n, k=k, x=float(z)))
    return out
