"""
Scalar and vector spherical harmonics on the unit sphere.

Conventions
-----------
``Y_n^m`` is orthonormal on the unit sphere and carries the Condon-Shortley
phase, so ``Y_n^{-m} = (-1)^m conj(Y_n^m)``.  The tangential fields are

    U_n^m = grad_S Y_n^m / sqrt(n (n + 1)),     V_n^m = xhat x U_n^m,

which makes ``{Y_n^m xhat, U_n^m, V_n^m}`` an orthonormal family in
``L^2`` of the sphere.  All vectors are Cartesian; arrays of points have
shape ``(..., 3)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Polarization",
    "ModeIndex",
    "SphereQuadrature",
    "TangentialFieldSamples",
    "build_quadrature",
    "mode_count",
    "flat_index",
    "vsh_basis",
    "eval_Ynm",
    "eval_Unm",
    "eval_Vnm",
    "project",
    "project_all",
    "synthesize",
    "tangential_samples",
]

_FOUR_PI = 4.0 * np.pi
_TANGENTIAL_TOL = 1e-10


class Polarization(str, enum.Enum):
    """TE: electric field along ``V_n^m``.  TM: magnetic field along ``V_n^m``."""

    TE = "TE"
    TM = "TM"


@dataclass(frozen=True, order=True)
class ModeIndex:
    """One vector-spherical-harmonic channel ``(n, m, pol)``."""

    n: int
    m: int
    pol: Polarization = Polarization.TE

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vector modes need n >= 1, got n={self.n}")
        if abs(self.m) > self.n:
            raise ValueError(f"|m| must not exceed n, got n={self.n}, m={self.m}")
        object.__setattr__(self, "pol", Polarization(self.pol))


def mode_count(nmax):
    """Number of ``(n, m)`` pairs with ``0 <= n <= nmax``."""
    return (nmax + 1) ** 2


def flat_index(n, m):
    """Position of ``(n, m)`` in the flattened tables returned by :func:`vsh_basis`."""
    return n * n + n + m


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on the unit sphere; immutable once built."""

    n_max: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self):
        return self.weights.size

    def integrate(self, values):
        """Integrate samples (leading axis = nodes) over the sphere."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))


def build_quadrature(n_max):
    """
    Gauss-Legendre in ``cos(theta)`` times the trapezoidal rule in ``phi``.

    Uses ``n_max + 1`` polar and ``2 (n_max + 1)`` azimuthal nodes, which
    integrates ``Y_n^m conj(Y_n'^m')`` exactly for ``n, n' <= n_max``.
    """
    if not 1 <= n_max <= 64:
        raise ValueError(f"n_max must lie in [1, 64], got {n_max}")
    t, wt = np.polynomial.legendre.leggauss(n_max + 1)
    n_phi = 2 * (n_max + 1)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - t * t)
    nodes = np.stack(
        [
            np.outer(st, np.cos(phi)),
            np.outer(st, np.sin(phi)),
            np.outer(t, np.ones(n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wt, np.full(n_phi, 2.0 * np.pi / n_phi)).reshape(-1)
    return SphereQuadrature(n_max=n_max, nodes=nodes, weights=weights)


def _angles(xhat):
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of length 3")
    norm = np.linalg.norm(xhat, axis=-1)
    if np.any(np.abs(norm - 1.0) > 1e-8):
        raise ValueError("points must lie on the unit sphere")
    xhat = xhat / norm[..., None]
    ct = xhat[..., 2]
    st = np.hypot(xhat[..., 0], xhat[..., 1])
    safe = st > 0
    cp = np.where(safe, xhat[..., 0] / np.where(safe, st, 1.0), 1.0)
    sp = np.where(safe, xhat[..., 1] / np.where(safe, st, 1.0), 0.0)
    return xhat, ct, st, cp, sp


def _legendre(nmax, ct, st):
    """
    Normalised associated Legendre data for ``m >= 0``.

    Returns ``P[n, m]``, ``Q[n, m] = P[n, m] / sin(theta)`` (``m >= 1``) and
    ``dP[n, m] = d P[n, m] / d theta``, each of shape ``(nmax+1, nmax+1, ...)``.
    Recurrence in ``n`` at fixed ``m``.
    """
    shape = (nmax + 1, nmax + 1) + ct.shape
    P = np.zeros(shape)
    Q = np.zeros(shape)
    dP = np.zeros(shape)
    c_mm = np.sqrt(1.0 / _FOUR_PI)
    st_pow = np.ones_like(st)  # sin^(m-1) theta for the Q seed
    for m in range(nmax + 1):
        if m > 0:
            c_mm = -np.sqrt((2 * m + 1) / (2.0 * m)) * c_mm
            Q[m, m] = c_mm * st_pow
            st_pow = st_pow * st
            P[m, m] = c_mm * st_pow
        else:
            P[0, 0] = c_mm
        for n in range(m + 1, nmax + 1):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            P[n, m] = a * ct * P[n - 1, m]
            Q[n, m] = a * ct * Q[n - 1, m]
            if n - 2 >= m:
                a_prev = np.sqrt((4.0 * (n - 1) ** 2 - 1.0) / ((n - 1) ** 2 - m * m))
                P[n, m] -= a / a_prev * P[n - 2, m]
                Q[n, m] -= a / a_prev * Q[n - 2, m]
    for n in range(1, nmax + 1):
        dP[n, 0] = np.sqrt(n * (n + 1.0)) * P[n, 1]
        for m in range(1, n + 1):
            dP[n, m] = n * ct * Q[n, m]
            if n - 1 >= m:
                dP[n, m] -= np.sqrt((2 * n + 1) / (2 * n - 1.0) * (n * n - m * m)) * Q[n - 1, m]
    return P, Q, dP


def vsh_basis(nmax, xhat):
    """
    Tables of ``Y``, ``U`` and ``V`` for all ``n <= nmax`` at the points ``xhat``.

    Returns
    -------
    Y : ndarray, shape ``(K,) + pts``
    U, V : ndarray, shape ``(K,) + pts + (3,)``
        ``K = (nmax + 1)**2``, indexed by :func:`flat_index`.  The ``n = 0``
        rows of ``U`` and ``V`` are zero.
    """
    xhat, ct, st, cp, sp = _angles(xhat)
    P, Q, dP = _legendre(nmax, ct, st)
    pts = ct.shape
    theta_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phi_hat = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)
    eiphi = cp + 1j * sp
    K = mode_count(nmax)
    Y = np.zeros((K,) + pts, dtype=complex)
    U = np.zeros((K,) + pts + (3,), dtype=complex)
    V = np.zeros_like(U)
    for m in range(nmax + 1):
        e = eiphi**m
        sign = (-1) ** m
        for n in range(m, nmax + 1):
            k = flat_index(n, m)
            Y[k] = P[n, m] * e
            if n > 0:
                s = np.sqrt(n * (n + 1.0))
                a_t = (dP[n, m] * e / s)[..., None]
                a_p = (1j * m * Q[n, m] * e / s)[..., None]
                U[k] = a_t * theta_hat + a_p * phi_hat
                # xhat x theta_hat = phi_hat, xhat x phi_hat = -theta_hat
                V[k] = a_t * phi_hat - a_p * theta_hat
            if m > 0:
                kk = flat_index(n, -m)
                Y[kk] = sign * np.conj(Y[k])
                U[kk] = sign * np.conj(U[k])
                V[kk] = sign * np.conj(V[k])
    return Y, U, V


def _check_nm(n, m, vector):
    if n < (1 if vector else 0):
        raise ValueError(f"degree {n} carries no {'vector' if vector else 'scalar'} harmonic")
    if abs(m) > n:
        raise ValueError(f"|m| must not exceed n, got n={n}, m={m}")


def eval_Ynm(n, m, xhat):
    """Orthonormal spherical harmonic ``Y_n^m(xhat)``."""
    _check_nm(n, m, vector=False)
    Y, _, _ = vsh_basis(n, xhat)
    return Y[flat_index(n, m)]


def eval_Unm(n, m, xhat):
    """Normalised surface gradient ``U_n^m(xhat)``, shape ``(..., 3)``."""
    _check_nm(n, m, vector=True)
    _, U, _ = vsh_basis(n, xhat)
    return U[flat_index(n, m)]


def eval_Vnm(n, m, xhat):
    """``V_n^m(xhat) = xhat x U_n^m(xhat)``, shape ``(..., 3)``."""
    _check_nm(n, m, vector=True)
    _, _, V = vsh_basis(n, xhat)
    return V[flat_index(n, m)]


@dataclass(frozen=True)
class TangentialFieldSamples:
    """Complex tangential vectors sampled on the nodes of a quadrature."""

    quadrature: SphereQuadrature
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.quadrature.nodes.shape:
            raise ValueError("need one 3-vector per quadrature node")
        radial = np.abs(np.einsum("pi,pi->p", values, self.quadrature.nodes))
        scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
        if np.any(radial > _TANGENTIAL_TOL * scale):
            raise ValueError("samples are not tangential to the sphere")
        object.__setattr__(self, "values", values)


def tangential_samples(quadrature, values):
    """Strip the radial part of ``values`` and wrap them as samples."""
    values = np.asarray(values, dtype=complex)
    x = quadrature.nodes
    radial = np.einsum("pi,pi->p", values, x)
    return TangentialFieldSamples(quadrature, values - radial[:, None] * x)


_BASES = ("Y", "U", "V")


def project(samples, basis, n, m):
    """
    ``L^2`` inner product of sampled vectors with one basis field.

    Parameters
    ----------
    samples : TangentialFieldSamples
    basis : {"U", "V", "Y"}
        ``"Y"`` pairs against the radial field ``Y_n^m xhat`` (zero for
        genuinely tangential samples).
    n, m : int

    Notes
    -----
    Exact only while the sampled field is band limited so that its products
    with the basis are integrated exactly by the quadrature; beyond that the
    result degrades through aliasing.
    """
    if basis not in _BASES:
        raise ValueError(f"basis must be one of {_BASES}")
    _check_nm(n, m, vector=basis != "Y")
    q = samples.quadrature
    Y, U, V = vsh_basis(n, q.nodes)
    k = flat_index(n, m)
    if basis == "Y":
        ref = Y[k][:, None] * q.nodes
    else:
        ref = (U if basis == "U" else V)[k]
    return complex(q.integrate(np.einsum("pi,pi->p", samples.values, np.conj(ref))))


def project_all(quadrature, values, nmax):
    """
    Coefficients of a sampled vector field on the full family up to ``nmax``.

    Returns
    -------
    dict
        ``{"Y": c_Y, "U": c_U, "V": c_V}``, each of length ``(nmax+1)**2``.
    """
    values = np.asarray(values, dtype=complex)
    Y, U, V = vsh_basis(nmax, quadrature.nodes)
    w = quadrature.weights
    radial = np.einsum("pi,pi->p", values, quadrature.nodes)
    return {
        "Y": np.conj(Y) @ (w * radial),
        "U": np.einsum("kpi,pi,p->k", np.conj(U), values, w),
        "V": np.einsum("kpi,pi,p->k", np.conj(V), values, w),
    }


def synthesize(xhat, coeffs, nmax):
    """Evaluate ``sum c_Y Y xhat + c_U U + c_V V`` at points ``xhat``."""
    Y, U, V = vsh_basis(nmax, xhat)
    xhat = np.asarray(xhat, dtype=float)
    K = mode_count(nmax)
    out = np.zeros(xhat.shape, dtype=complex)
    if "Y" in coeffs:
        out += np.tensordot(np.asarray(coeffs["Y"])[:K], Y, axes=(0, 0))[..., None] * xhat
    if "U" in coeffs:
        out += np.tensordot(np.asarray(coeffs["U"])[:K], U, axes=(0, 0))
    if "V" in coeffs:
        out += np.tensordot(np.asarray(coeffs["V"])[:K], V, axes=(0, 0))
    return out
