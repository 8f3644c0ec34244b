"""
Per-mode transmission solves for the rescaled cloaking problem.

Everything here lives in the unit-sphere frame obtained by pulling the cloak
back with ``F_rho`` and magnifying by ``1/rho``: the cloaked object fills
``B_1`` with ``eps = mu = I`` and wavenumber ``omega``; outside ``B_1`` the
wavenumber is ``rho * omega``.

Field representation
--------------------
On every sphere ``|x| = r`` a field is expanded as
``sum c_Y Y_n^m xhat + c_U U_n^m + c_V V_n^m``.  For a channel ``(n, m)``
with ``s = sqrt(n(n+1))`` and local wavenumber ``k``:

* TE, ``E = f(r) V``::

      H_Y = -s f / (i k r),   H_U = -(r f)' / (i k r)

* TM, ``H = g(r) V``::

      E_Y = s g / (i k r),    E_U = (r g)' / (i k r)

Radiating exterior profiles are ``A h_n(k r) / h_n(k)`` so that ``A`` is the
tangential trace at ``r = 1+``.  Interior homogeneous profiles are
``c j_n(omega r)`` (no division by ``j_n(omega)``, which vanishes at
resonance).

Plane-wave data enter through the jumps
``[E x nu] = -v~ x nu`` and ``[H x nu] = -H~_inc x nu`` on ``|x| = 1``; an
interior current ``J = f(r) V_n^m`` enters through a particular solution of

    e'' + 2 e'/r + (omega^2 - n(n+1)/r^2) e = -i omega f

built by variation of parameters over ``{j_n(omega r), y_n(omega r)}``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from . import specfun as sf
from . import vsh
from .errors import ConfigurationError, ResonanceError, ScopeError, SolverError
from .transform import check_rho
from .vsh import ModeIndex, Polarization

__all__ = [
    "RESONANCE_TOL",
    "ILL_CONDITIONED_TOL",
    "RESIDUAL_TOL",
    "ResonanceWarning",
    "BesselProfile",
    "PlaneWaveSource",
    "InteriorSource",
    "ScenarioConfig",
    "RadialFactors",
    "ParticularSolution",
    "ChannelSolution",
    "TransmissionSolution",
    "ResonantField",
    "ResonanceSpace",
    "LimitField",
    "admittance_ext",
    "admittance_int",
    "resonance_measure",
    "is_resonant",
    "solve",
    "solve_plane_wave",
    "solve_interior_source",
    "resonance_space",
    "compatibility",
    "is_compatible",
    "solve_limit_interior",
    "eval_field",
    "boundary_pairing",
    "source_energy",
]

#: ``|j_n(w)| / hypot(j_n(w), j_n'(w))`` at or below this declares resonance.
RESONANCE_TOL = 1e-12
#: Below this (but above RESONANCE_TOL) solves warn about ill-conditioning.
ILL_CONDITIONED_TOL = 1e-6
#: Maximum accepted relative violation of the transmission conditions.
RESIDUAL_TOL = 1e-10
_SINGULAR_TOL = 1e-13
_PLANE_WAVE_DECAY = 1e-14
_MAX_DEGREE = 40

_GL_NODES = 20
_GL_U, _GL_W = np.polynomial.legendre.leggauss(_GL_NODES)
_GRADED_PANELS = 14


class ResonanceWarning(RuntimeWarning):
    """The frequency is close to, but not on, a resonant Bessel zero."""


# ---------------------------------------------------------------- sources


@dataclass(frozen=True)
class BesselProfile:
    """Radial source profile ``scale * j_n(omega r)``."""

    n: int
    omega: float
    scale: complex = 1.0

    def __call__(self, r):
        return self.scale * sf.sph_bessel_j(self.n, self.omega * np.asarray(r, dtype=float))


@dataclass(frozen=True)
class PlaneWaveSource:
    """Incident field ``amplitude * polarization * exp(i omega direction . x)``."""

    direction: tuple = (0.0, 0.0, 1.0)
    polarization: tuple = (0.0, 1.0, 0.0)
    amplitude: complex = 1.0
    kind = "plane_wave"

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        p = np.asarray(self.polarization, dtype=complex)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ConfigurationError("plane-wave direction must be a unit vector")
        if abs(np.dot(d, p)) > 1e-12 * max(1.0, np.linalg.norm(p)):
            raise ConfigurationError("plane-wave polarization must be orthogonal to its direction")

    def fields(self, omega, points):
        """Incident ``(E, H)`` at physical points, ``H = curl E / (i omega)``."""
        d = np.asarray(self.direction, dtype=float)
        p = np.asarray(self.polarization, dtype=complex) * self.amplitude
        phase = np.exp(1j * omega * (np.asarray(points) @ d))[..., None]
        return phase * p, phase * np.cross(d, p)


@dataclass(frozen=True)
class InteriorSource:
    """
    Interior current ``J = profile(r) V_n^m`` supported in ``B_1``.

    ``profile`` defaults to ``j_n(omega r)`` at the solve frequency.
    """

    mode: ModeIndex
    profile: Callable | None = None
    kind = "interior_mode"

    def __post_init__(self):
        if self.mode.pol is not Polarization.TE:
            raise ConfigurationError("interior currents are supported on the V (TE) channel only")

    def radial(self, omega):
        if self.profile is None:
            return BesselProfile(self.mode.n, omega)
        return self.profile


@dataclass(frozen=True)
class ScenarioConfig:
    rho: float
    omega: float
    source: PlaneWaveSource | InteriorSource
    n_max: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho", check_rho(self.rho))
        if not (np.isfinite(self.omega) and 0.0 < self.omega <= 100.0):
            raise ConfigurationError(f"omega must lie in (0, 100], got {self.omega}")
        if isinstance(self.source, InteriorSource) and self.n_max is not None:
            if self.n_max < self.source.mode.n:
                raise ConfigurationError("n_max is below the degree excited by the source")
        if self.n_max is not None and not 1 <= self.n_max <= _MAX_DEGREE:
            raise ConfigurationError(f"n_max must lie in [1, {_MAX_DEGREE}]")

    @property
    def exterior_wavenumber(self):
        return self.rho * self.omega


# ------------------------------------------------------------ admittances


@lru_cache(maxsize=4096)
def _bessel_at(n, x):
    """``(j_n, j_n', y_n, y_n')`` at a scalar ``x > 0`` as Python floats."""
    return (
        float(sf.sph_bessel_j(n, x)),
        float(sf.sph_bessel_dj(n, x)),
        float(sf.sph_bessel_y(n, x)),
        float(sf.sph_bessel_dy(n, x)),
    )


def _radial_funcs(n, x, kind):
    """``(z_n(x), z_n'(x))`` for ``kind`` in ``{"j", "h"}``; scalars hit the cache."""
    x = np.asarray(x, dtype=float)
    if x.size == 1:
        j, dj, y, dy = _bessel_at(n, float(x.reshape(-1)[0]))
        if kind == "j":
            return np.full(x.shape, j), np.full(x.shape, dj)
        return np.full(x.shape, j + 1j * y), np.full(x.shape, dj + 1j * dy)
    return _radial_table(n, kind, x.tobytes(), x.shape)


@lru_cache(maxsize=1024)
def _radial_table(n, kind, raw, shape):
    # channels sharing an order are evaluated on identical radial grids
    x = np.frombuffer(raw, dtype=float).reshape(shape)
    if kind == "j":
        vals = sf.sph_bessel_j(n, x), sf.sph_bessel_dj(n, x)
    else:
        vals = sf.sph_hankel1(n, x), sf.sph_hankel1_d(n, x)
    for v in vals:
        v.setflags(write=False)
    return vals


def admittance_ext(r, n=1):
    """``(h_n(r) + r h_n'(r)) / (-i r h_n(r))`` for radiating profiles."""
    h, dh = _radial_funcs(n, r, "h")
    return (h + r * dh) / (-1j * r * h)


def admittance_int(r, n=1):
    """
    ``(j_n(r) + r j_n'(r)) / (-i r j_n(r))`` for regular profiles.

    Raises
    ------
    ResonanceError
        When ``r`` sits on a zero of ``j_n`` (see :func:`resonance_measure`).
    """
    r = float(r)
    j, dj, _, _ = _bessel_at(n, r)
    if j == 0.0 or is_resonant(n, r):
        raise ResonanceError(f"admittance_int has a pole: j_{n}({r!r}) = {j:.3e}")
    return (j + r * dj) / (-1j * r * j)


def resonance_measure(n, omega):
    """
    ``|j_n(omega)| / hypot(j_n(omega), j_n'(omega))``.

    Roughly the distance from ``omega`` to the nearest zero of ``j_n``
    relative to the local scale; unlike ``|j_n(omega)|`` it does not flag
    the tiny-but-nonzero values of high orders at small ``omega``.
    """
    j, dj, _, _ = _bessel_at(n, float(omega))
    scale = np.hypot(j, dj)
    return abs(j) / scale if scale > 0 else 0.0


def is_resonant(n, omega, tol=RESONANCE_TOL):
    return n >= 1 and resonance_measure(n, omega) <= tol


def _warn_if_close(n, omega):
    meas = resonance_measure(n, omega)
    if RESONANCE_TOL < meas < ILL_CONDITIONED_TOL:
        warnings.warn(
            f"omega={omega!r} is within {meas:.1e} (relative) of a zero of j_{n}; "
            "the solve is ill-conditioned",
            ResonanceWarning,
            stacklevel=3,
        )


# ---------------------------------------------------- particular solution


def _gl_panel(a, b):
    """Gauss-Legendre nodes/weights mapped to ``[a, b]`` (broadcast over a, b)."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (_GL_U + 1.0), half * _GL_W


def _graded_nodes(r, toward_zero):
    """
    Composite GL nodes for ``[0, r]`` (``toward_zero``) or ``[r, 1]``.

    Panels are geometrically graded towards the origin so that profiles
    with power-law behaviour at ``r = 0`` are integrated accurately.
    Returns ``(nodes, weights)`` of shape ``r.shape + (P * GL,)``.
    """
    r = np.asarray(r, dtype=float)
    if toward_zero:
        k = np.arange(_GRADED_PANELS + 1)
        edges = r[..., None] * 2.0 ** (-k)
        edges = np.concatenate([edges, np.zeros(r.shape + (1,))], axis=-1)
        hi, lo = edges[..., :-1], edges[..., 1:]
    else:
        k = np.arange(64)
        safe = np.where(r > 0, r, 2.0 ** -60)
        edges = np.minimum(safe[..., None] * 2.0**k, 1.0)
        lo, hi = edges[..., :-1], edges[..., 1:]
        keep = int(np.max(np.sum(lo < 1.0, axis=-1))) if lo.size else 0
        lo, hi = lo[..., :keep], hi[..., :keep]
    x, w = _gl_panel(lo, hi)
    shape = r.shape + (-1,)
    return x.reshape(shape), w.reshape(shape)


@dataclass(frozen=True)
class ParticularSolution:
    """
    Regular particular solution of the driven TE radial equation on ``[0, 1]``.

        e_p(r) = y_n(w r) int_0^r j_n(w t) G(t) dt + j_n(w r) int_r^1 y_n(w t) G(t) dt

    with ``G(t) = -i w^2 t^2 f(t)`` (the forcing over the Wronskian).
    """

    n: int
    omega: float
    profile: Callable

    def forcing(self, t):
        t = np.asarray(t, dtype=float)
        return -1j * self.omega**2 * t * t * np.asarray(self.profile(t), dtype=complex)

    def _integrals(self, r):
        w, n = self.omega, self.n
        x0, w0 = _graded_nodes(r, toward_zero=True)
        lower = np.sum(w0 * sf.sph_bessel_j(n, w * x0) * self.forcing(x0), axis=-1)
        x1, w1 = _graded_nodes(r, toward_zero=False)
        with np.errstate(over="ignore", invalid="ignore"):
            y1 = sf.sph_bessel_y(n, w * np.where(w1 > 0, x1, 1.0))
            upper = np.sum(np.where(w1 > 0, w1 * y1 * self.forcing(x1), 0.0), axis=-1)
        return lower, upper

    def __call__(self, r):
        """``(e_p(r), e_p'(r))`` for ``0 < r <= 1``."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0) or np.any(r > 1.0 + 1e-15):
            raise ValueError("particular solution is evaluated on (0, 1]")
        w, n = self.omega, self.n
        lower, upper = self._integrals(r)
        wr = w * r
        j, y = sf.sph_bessel_j(n, wr), sf.sph_bessel_y(n, wr)
        dj, dy = sf.sph_bessel_dj(n, wr), sf.sph_bessel_dy(n, wr)
        e = y * lower + j * upper
        de = w * (dy * lower + dj * upper)
        return e, de

    @property
    def moment(self):
        """``int_0^1 j_n(w t) G(t) dt``; the trace is ``e_p(1) = y_n(w) * moment``."""
        lower, _ = self._integrals(np.array(1.0))
        return complex(lower)

    def residual(self, r, h=1e-3):
        """
        Pointwise residual of the radial ODE by a 5-point second derivative.

        Returns ``|e'' + 2e'/r + (w^2 - L/r^2) e + i w f|`` divided by the
        largest of the individual terms.
        """
        r = np.asarray(r, dtype=float)
        L = self.n * (self.n + 1.0)
        w = self.omega
        offs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
        vals = np.stack([self(r + o)[0] for o in offs])
        e = vals[2]
        d1 = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
        d2 = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
        src = 1j * w * np.asarray(self.profile(r), dtype=complex)
        terms = [d2, 2 * d1 / r, (w * w - L / (r * r)) * e, src]
        scale = np.max(np.abs(np.stack(terms)), axis=0)
        return np.abs(sum(terms)) / np.where(scale > 0, scale, 1.0)


def _radial_l2(func, a, b, rtol=1e-12, max_nodes=1024):
    """``int_a^b func(r) dr`` for smooth ``func`` by GL with node doubling."""
    nodes = 32
    prev = None
    while True:
        u, w = np.polynomial.legendre.leggauss(nodes)
        r = a + 0.5 * (b - a) * (u + 1.0)
        val = 0.5 * (b - a) * np.sum(w * func(r))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return float(val)
        if nodes >= max_nodes:
            return float(val)
        prev, nodes = val, 2 * nodes


def source_energy(profile, rtol=1e-12):
    """``int_0^1 r^2 |f(r)|^2 dr``, i.e. ``||J||^2`` over ``B_1`` for ``J = f V_n^m``."""
    return _radial_l2(lambda r: r * r * np.abs(np.asarray(profile(r), dtype=complex)) ** 2, 0.0, 1.0, rtol)


def _check_profile(profile):
    x, w = _graded_nodes(np.array(1.0), toward_zero=True)
    vals = np.asarray(profile(x), dtype=complex)
    if vals.shape != x.shape:
        raise ConfigurationError("radial profile must be vectorised over r")
    panels = np.sum((w * x * x * np.abs(vals) ** 2).reshape(-1, _GL_NODES), axis=1)
    # panels halve towards r = 0; an integrable r^2 |f|^2 must shrink with them
    inner, outer = panels[-2], panels[-3]
    if not np.all(np.isfinite(panels)) or (outer > 0 and inner >= 0.999 * outer):
        raise ConfigurationError("radial profile is not square integrable with weight r^2 on [0, 1]")


# -------------------------------------------------------- radial factors


class RadialFactors(NamedTuple):
    """Channel coefficients of ``E`` and ``H`` on ``Y xhat``, ``U``, ``V``."""

    E_Y: np.ndarray
    E_U: np.ndarray
    E_V: np.ndarray
    H_Y: np.ndarray
    H_U: np.ndarray
    H_V: np.ndarray

    def scaled(self, c):
        return RadialFactors(*(c * np.asarray(f) for f in self))

    @property
    def electric(self):
        return (self.E_Y, self.E_U, self.E_V)

    @property
    def magnetic(self):
        return (self.H_Y, self.H_U, self.H_V)


def _te_factors(n, k, r, f, rf_prime):
    s = np.sqrt(n * (n + 1.0))
    zero = np.zeros_like(f)
    return RadialFactors(zero, zero, f, -s * f / (1j * k * r), -rf_prime / (1j * k * r), zero)


def _tm_factors(n, k, r, g, rg_prime):
    s = np.sqrt(n * (n + 1.0))
    zero = np.zeros_like(g)
    return RadialFactors(s * g / (1j * k * r), rg_prime / (1j * k * r), zero, zero, zero, g)


def _profile_ext(n, k, amp, r):
    j1, _, y1, _ = _bessel_at(n, float(k))
    h1 = j1 + 1j * y1
    kr = k * r
    h, dh = _radial_funcs(n, kr, "h")
    f = amp * h / h1
    rf_prime = amp * (h + kr * dh) / h1
    return f, rf_prime


def _profile_int(n, omega, coeff, r, particular=None):
    wr = omega * r
    j, dj = _radial_funcs(n, wr, "j")
    f = coeff * j
    rf_prime = coeff * (j + wr * dj)
    if particular is not None:
        e, de = particular(r)
        f = f + e
        rf_prime = rf_prime + e + r * de
    return f, rf_prime


# ---------------------------------------------------------- solutions


@dataclass(frozen=True)
class ChannelSolution:
    """
    Coefficients of one channel.

    ``A_ext`` is the tangential trace at ``r = 1+`` (``E_V`` for TE, ``H_V``
    for TM); ``c_int`` multiplies ``j_n(omega r)`` inside; ``particular`` is
    the driven part, if any.
    """

    mode: ModeIndex
    A_ext: complex
    c_int: complex
    particular: ParticularSolution | None = None
    jump: tuple = (0j, 0j)
    residual: float = 0.0

    def trace_int(self, omega):
        """Interior trace at ``r = 1-`` of the V-directed field."""
        val = self.c_int * float(sf.sph_bessel_j(self.mode.n, omega))
        if self.particular is not None:
            val += complex(self.particular(np.array(1.0))[0])
        return complex(val)


@dataclass(frozen=True)
class TransmissionSolution:
    """
    Solved coefficients for every excited channel of one scenario.

    ``exterior_scale`` and ``interior_scale`` convert frame fields to the
    physical ``(E_c, H_c)``: outside ``B_2`` the physical field at ``x`` is
    ``exterior_scale * field(x / rho)``; inside ``B_1`` it is
    ``interior_scale * field(x)``.
    """

    rho: float
    omega: float
    channels: dict = field(default_factory=dict)
    exterior_scale: float = 1.0
    interior_scale: float = 1.0
    n_max: int = 0

    @property
    def exterior_wavenumber(self):
        return self.rho * self.omega

    @property
    def max_residual(self):
        return max((c.residual for c in self.channels.values()), default=0.0)

    def A_ext(self, mode):
        ch = self.channels.get(mode)
        return ch.A_ext if ch is not None else 0j

    def A_int(self, mode):
        ch = self.channels.get(mode)
        return ch.trace_int(self.omega) if ch is not None else 0j


def eval_field(solution, r, channel, side="auto"):
    """
    Radial factors of ``(E, H)`` for one channel at radius ``r`` (frame units).

    ``side`` picks the branch at ``r = 1``: ``"interior"``, ``"exterior"``,
    or ``"auto"`` (interior for ``r <= 1``).
    """
    r = np.asarray(r, dtype=float)
    ch = solution.channels.get(channel)
    if ch is None:
        z = np.zeros(r.shape, dtype=complex)
        return RadialFactors(z, z, z, z, z, z)
    if side == "auto":
        outside = r > 1.0
    elif side in ("interior", "exterior"):
        outside = np.full(r.shape, side == "exterior")
    else:
        raise ValueError("side must be 'auto', 'interior' or 'exterior'")
    n = channel.n
    build = _te_factors if channel.pol is Polarization.TE else _tm_factors
    out = [np.zeros(r.shape, dtype=complex) for _ in range(6)]
    if np.any(outside):
        k = solution.exterior_wavenumber
        ro = r[outside]
        f, rfp = _profile_ext(n, k, ch.A_ext, ro)
        for slot, val in zip(out, build(n, k, ro, f, rfp)):
            slot[outside] = val
    inside = ~outside
    if np.any(inside):
        ri = r[inside]
        f, rfp = _profile_int(n, solution.omega, ch.c_int, ri, ch.particular)
        for slot, val in zip(out, build(n, solution.omega, ri, f, rfp)):
            slot[inside] = val
    return RadialFactors(*out)


def _tangential_pair(factors, pol):
    # (V-directed component, U-component of the partner field)
    if pol is Polarization.TE:
        return complex(factors.E_V[()]), complex(factors.H_U[()])
    return complex(factors.H_V[()]), complex(factors.E_U[()])


def _channel_residual(solution, ch):
    one = np.array(1.0)
    ext = _tangential_pair(eval_field(solution, one, ch.mode, side="exterior"), ch.mode.pol)
    inn = _tangential_pair(eval_field(solution, one, ch.mode, side="interior"), ch.mode.pol)
    viol = [abs(e - i - d) for e, i, d in zip(ext, inn, ch.jump)]
    scale = max([abs(v) for v in ext + inn + tuple(ch.jump)] + [1e-300])
    return max(viol) / scale


def _solve_channel(mode, omega, k, jump_v, jump_u, particular=None):
    """
    Solve the 2x2 matching system of one channel.

    ``jump_v`` is the prescribed jump (exterior minus interior) of the
    V-directed field, ``jump_u`` the jump of the partner field's U-component.
    """
    n = mode.n
    j, dj, _, _ = _bessel_at(n, float(omega))
    a_ext = complex(admittance_ext(k, n))
    d_int = (j + omega * dj) / (-1j * omega)  # = j_n(w) a_int(w), pole-free
    sign = 1.0 if mode.pol is Polarization.TE else -1.0
    p_v, p_u = 0j, 0j
    if particular is not None:
        e, de = particular(np.array(1.0))
        p_v = complex(e)
        p_u = complex((e + de) / (-1j * omega))
    # interior column is O(j_n(w)), tiny for n >> w; normalise it
    col = max(abs(j), abs(d_int))
    mat = np.array([[1.0, -j / col], [a_ext, -d_int / col]], dtype=complex)
    rhs = np.array([jump_v + p_v, sign * jump_u + p_u], dtype=complex)
    det = np.linalg.det(mat)
    if abs(det) < _SINGULAR_TOL * max(abs(a_ext), 1.0):
        raise SolverError(f"matching system for mode {mode} is singular (|det| = {abs(det):.2e})", mode=mode)
    A_ext, c_scaled = np.linalg.solve(mat, rhs)
    c_int = c_scaled / col
    return ChannelSolution(mode, complex(A_ext), complex(c_int), particular, (complex(jump_v), complex(jump_u)))


def _finalize(solution):
    checked = {}
    for mode, ch in solution.channels.items():
        res = _channel_residual(solution, ch)
        if not res <= RESIDUAL_TOL:
            raise SolverError(f"transmission residual {res:.2e} exceeds {RESIDUAL_TOL:.0e} on mode {mode}", mode=mode)
        checked[mode] = ChannelSolution(ch.mode, ch.A_ext, ch.c_int, ch.particular, ch.jump, res)
    return TransmissionSolution(
        solution.rho, solution.omega, checked, solution.exterior_scale, solution.interior_scale, solution.n_max
    )


@lru_cache(maxsize=32)
def _projection_tables(n_max, q_order):
    quad = vsh.build_quadrature(q_order)
    Y, U, V = vsh.vsh_basis(n_max, quad.nodes)
    return quad, np.conj(U) * quad.weights[None, :, None], np.conj(V) * quad.weights[None, :, None]


def _incident_coefficients(config, n_max):
    """``(v~_U, v~_V, H~_U, H~_V)`` on ``|x| = 1`` for all ``(n, m)`` up to ``n_max``."""
    q_order = min(64, 2 * n_max + 12)
    quad, cU, cV = _projection_tables(n_max, q_order)
    src = config.source
    # v~(x) = v(rho x); (1/(i rho w)) curl v~ = H_inc(rho x)
    e_inc, h_inc = src.fields(config.omega, config.rho * quad.nodes)
    proj = lambda basis, vals: np.einsum("kpi,pi->k", basis, vals)  # noqa: E731
    return proj(cU, e_inc), proj(cV, e_inc), proj(cU, h_inc), proj(cV, h_inc)


def solve_plane_wave(config):
    """
    Scattering of a plane wave by the cloaked unit sphere (frame units).

    For each channel the jumps are projected from the rescaled incident trace
    and the 2x2 matching system is solved densely.  The degree is raised from
    the default until the last degree's ``|A_ext|`` drops below ``1e-14`` of
    the largest coefficient.

    Raises
    ------
    ResonanceError
        If ``j_n(omega) = 0`` for some ``n <= n_max``.
    SolverError
        On a singular matching system or a residual above tolerance.
    """
    if not isinstance(config.source, PlaneWaveSource):
        raise ConfigurationError("solve_plane_wave needs a PlaneWaveSource")
    w, k = config.omega, config.exterior_wavenumber
    n_max = config.n_max or 8
    while True:
        for n in range(1, n_max + 1):
            if is_resonant(n, w):
                raise ResonanceError(f"omega={w!r} is a zero of j_{n}; the plane-wave scenario needs j_n(omega) != 0")
            _warn_if_close(n, w)
        vU, vV, hU, hV = _incident_coefficients(config, n_max)
        channels = {}
        for n in range(1, n_max + 1):
            for m in range(-n, n + 1):
                i = vsh.flat_index(n, m)
                te = ModeIndex(n, m, Polarization.TE)
                tm = ModeIndex(n, m, Polarization.TM)
                channels[te] = _solve_channel(te, w, k, -vV[i], -hU[i])
                channels[tm] = _solve_channel(tm, w, k, -hV[i], -vU[i])
        mags = {n: max(abs(c.A_ext) for md, c in channels.items() if md.n == n) for n in range(1, n_max + 1)}
        top = max(mags.values())
        if config.n_max is not None or top == 0 or mags[n_max] <= _PLANE_WAVE_DECAY * top or n_max >= _MAX_DEGREE:
            break
        n_max = min(_MAX_DEGREE, n_max + 4)
    sol = TransmissionSolution(config.rho, w, channels, exterior_scale=1.0, interior_scale=config.rho, n_max=n_max)
    return _finalize(sol)


def solve_interior_source(config):
    """
    Field radiated by an interior current ``J = f(r) V_n^m`` (frame units).

    The physical interior field equals the frame field; outside ``B_2`` the
    physical field is ``rho^{-1}`` times the frame field at ``x / rho``.
    """
    src = config.source
    if not isinstance(src, InteriorSource):
        raise ConfigurationError("solve_interior_source needs an InteriorSource")
    w, k = config.omega, config.exterior_wavenumber
    mode = src.mode
    _warn_if_close(mode.n, w)
    profile = src.radial(w)
    _check_profile(profile)
    particular = ParticularSolution(mode.n, w, profile)
    ch = _solve_channel(mode, w, k, 0j, 0j, particular)
    n_max = config.n_max or max(mode.n + 4, 8)
    sol = TransmissionSolution(config.rho, w, {mode: ch}, exterior_scale=1.0 / config.rho, interior_scale=1.0, n_max=n_max)
    return _finalize(sol)


def solve(config):
    """Dispatch on the source kind."""
    if isinstance(config.source, PlaneWaveSource):
        return solve_plane_wave(config)
    return solve_interior_source(config)


# ------------------------------------------------------------ resonance


@dataclass(frozen=True)
class ResonantField:
    """
    One element of the resonance space at a zero of ``j_n``.

    TE: ``E = j_n(w r) V_n^m``, ``H = curl E / (i w)``.
    TM: ``H = j_n(w r) V_n^m``, ``E = -curl H / (i w)``.
    """

    mode: ModeIndex
    omega: float

    def factors(self, r):
        r = np.asarray(r, dtype=float)
        n, w = self.mode.n, self.omega
        f, rfp = _profile_int(n, w, 1.0, r)
        build = _te_factors if self.mode.pol is Polarization.TE else _tm_factors
        return build(n, w, r, f, rfp)


@dataclass(frozen=True)
class ResonanceSpace:
    omega: float
    n_max: int
    basis: tuple = ()

    @property
    def is_empty(self):
        return not self.basis

    @property
    def pairs(self):
        """Sorted distinct ``(n, m)`` carried by the basis."""
        return sorted({(f.mode.n, f.mode.m) for f in self.basis})


def resonance_space(omega, n_max=20, tol=RESONANCE_TOL):
    """
    Truncated resonance space: all ``n <= n_max`` with ``j_n(omega) = 0``.

    Each resonant degree contributes ``2 (2n + 1)`` fields (every ``m``, both
    polarisations).  Degree 0 never contributes.
    """
    if not omega > 0:
        raise ConfigurationError("omega must be positive")
    basis = []
    for n in range(1, n_max + 1):
        if is_resonant(n, omega, tol):
            for m in range(-n, n + 1):
                for pol in (Polarization.TE, Polarization.TM):
                    basis.append(ResonantField(ModeIndex(n, m, pol), float(omega)))
    return ResonanceSpace(float(omega), n_max, tuple(basis))


def _radial_gauss(func, a=0.0, b=1.0, nodes=64):
    u, w = np.polynomial.legendre.leggauss(nodes)
    r = a + 0.5 * (b - a) * (u + 1.0)
    return 0.5 * (b - a) * np.sum(w * func(r))


@lru_cache(maxsize=16)
def _angular_gram(n1, m1, n2, m2):
    """``int V_{n1}^{m1} . conj(B)`` for ``B`` in ``(Y xhat, U, V)`` of ``(n2, m2)``."""
    quad = vsh.build_quadrature(max(n1, n2) + 1)
    samples = vsh.TangentialFieldSamples(quad, vsh.eval_Vnm(n1, m1, quad.nodes))
    return tuple(vsh.project(samples, b, n2, m2) for b in ("Y", "U", "V"))


def compatibility(source, space):
    """
    Pairings ``int_{B_1} J . conj(E)`` against every resonant field.

    The radial factor is integrated by Gauss-Legendre on ``[0, 1]``; the
    angular factor is the quadrature inner product of ``V`` of the source
    with each component of the resonant field.
    """
    if not isinstance(source, InteriorSource):
        raise ConfigurationError("compatibility is defined for interior sources")
    profile = source.radial(space.omega)
    ns, ms = source.mode.n, source.mode.m
    out = []
    for elem in space.basis:
        ang = _angular_gram(ns, ms, elem.mode.n, elem.mode.m)
        total = 0j
        for comp, a in zip(range(3), ang):
            if abs(a) < 1e-14:
                continue

            def integrand(r, comp=comp):
                fac = elem.factors(r).electric[comp]
                return r * r * np.asarray(profile(r), dtype=complex) * np.conj(fac)

            total += a * _radial_gauss(integrand)
        out.append(complex(total))
    return out


def is_compatible(pairings, tol=1e-10):
    """Vacuously true for an empty resonance space."""
    return all(abs(p) <= tol for p in pairings)


# --------------------------------------------------------- limit field


@dataclass(frozen=True)
class LimitField:
    """
    Interior limit ``(E_0, H_0)`` for an interior current on one TE channel.

    ``E_0 = (c j_n(w r) + e_p(r)) V_n^m`` with ``c`` chosen so that the
    normal component of ``curl E_0`` vanishes on ``|x| = 1``, which for this
    channel is ``E_0``'s trace ``= 0``.
    """

    mode: ModeIndex
    omega: float
    coeff: complex
    particular: ParticularSolution
    residual: float = 0.0

    def factors(self, r):
        r = np.asarray(r, dtype=float)
        f, rfp = _profile_int(self.mode.n, self.omega, self.coeff, r, self.particular)
        return _te_factors(self.mode.n, self.omega, r, f, rfp)


def solve_limit_interior(source, omega, n_check=sf.MAX_ORDER):
    """
    Limit of the interior field as ``rho -> 0`` in the non-resonant case.

    Raises
    ------
    ScopeError
        If ``omega`` is resonant for any degree up to ``n_check``; that limit
        is governed by a non-local exterior problem not covered here.
    """
    if not isinstance(source, InteriorSource):
        raise ConfigurationError("solve_limit_interior needs an InteriorSource")
    for n in range(1, n_check + 1):
        if is_resonant(n, omega):
            raise ScopeError(
                f"omega={omega!r} is resonant (j_{n}(omega) = 0): the limit is the non-local "
                "resonant-compatible field, which this package does not solve"
            )
    mode = source.mode
    profile = source.radial(omega)
    _check_profile(profile)
    particular = ParticularSolution(mode.n, omega, profile)
    e1 = complex(particular(np.array(1.0))[0])
    j1 = float(sf.sph_bessel_j(mode.n, omega))
    coeff = -e1 / j1
    f, _ = _profile_int(mode.n, omega, coeff, np.array(1.0), particular)
    # normal curl of E_0 on |x| = 1 is -s E_0,V(1); H_0 . nu = 0 identically
    s = np.sqrt(mode.n * (mode.n + 1.0))
    scale = max(abs(e1), 1e-300)
    res = abs(complex(s * f)) / scale if e1 != 0 else abs(complex(f))
    return LimitField(mode, float(omega), coeff, particular, res)


# ------------------------------------------------------ energy identity


def boundary_pairing(solution, mode, q_order=None):
    """
    ``oint (nu x H).conj(E_0) - oint (nu x E).conj(H_0)`` over ``|x| = 1``.

    ``(E, H)`` is the interior trace of ``solution``; ``E_0 = j_n(w r) V_n^m``
    and ``H_0 = curl E_0 / (i w)``.  Both are synthesised on quadrature
    nodes and paired pointwise in Cartesian components.
    """
    n, m = mode.n, mode.m
    top = max([n] + [md.n for md in solution.channels])
    q = vsh.build_quadrature(q_order or top + 2)
    nu = q.nodes
    one = np.array([1.0])
    K = vsh.mode_count(top)

    def synth(factors, which, nn, mm):
        comps = factors.electric if which == "E" else factors.magnetic
        coeffs = {b: np.zeros(K, dtype=complex) for b in ("Y", "U", "V")}
        for b, c in zip(("Y", "U", "V"), comps):
            coeffs[b][vsh.flat_index(nn, mm)] = complex(np.asarray(c)[0])
        return vsh.synthesize(nu, coeffs, top)

    def total(which):
        acc = np.zeros(nu.shape, dtype=complex)
        for md in solution.channels:
            fac = eval_field(solution, one, md, side="interior")
            acc += synth(fac, which, md.n, md.m)
        return acc

    ref = ResonantField(ModeIndex(n, m, Polarization.TE), solution.omega).factors(one)
    E0, H0 = synth(ref, "E", n, m), synth(ref, "H", n, m)
    E, H = total("E"), total("H")
    first = q.integrate(np.einsum("pi,pi->p", np.cross(nu, H), np.conj(E0)))
    second = q.integrate(np.einsum("pi,pi->p", np.cross(nu, E), np.conj(H0)))
    return complex(first - second)
