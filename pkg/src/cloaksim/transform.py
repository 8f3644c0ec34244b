"""
The blow-up map of the regularised cloak and the media it produces.

``F_rho`` sends the small ball ``B_rho`` onto ``B_1``, stretches the shell
``rho <= |x| < 2`` onto ``1 <= |y| < 2`` and is the identity outside ``B_2``.
In the shell it is radial, ``F_rho(x) = g(|x|) x/|x|`` with

    g(r) = (2 - 2 rho)/(2 - rho) + r/(2 - rho),

so the push-forward ``F_* I = DF DF^T / det DF`` is diagonal in the
radial/tangential frame:

    radial     = g'(r) r^2 / g(r)^2
    tangential = 1 / g'(r)          (multiplicity 2)

with ``r = |F_rho^{-1}(y)|``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Region",
    "TransformMap",
    "MaterialSample",
    "eval_F",
    "eval_Finv",
    "jacobian",
    "pushforward_identity_tensor",
    "cloak_material",
    "equivalent_material",
    "push_field",
]


class Region(str, enum.Enum):
    EXTERIOR = "exterior"
    CLOAK_SHELL = "cloak_shell"
    CLOAKED = "cloaked"
    INCLUSION = "inclusion"


def check_rho(rho):
    rho = float(rho)
    if not 0.0 < rho < 0.5:
        raise ConfigurationError(f"rho must lie in (0, 1/2), got {rho}")
    return rho


@dataclass(frozen=True)
class TransformMap:
    """``F_rho`` for one value of the regularisation parameter."""

    rho: float

    def __post_init__(self):
        object.__setattr__(self, "rho", check_rho(self.rho))

    @property
    def slope(self):
        """``g'(r) = 1/(2 - rho)``, constant in the shell."""
        return 1.0 / (2.0 - self.rho)

    def g(self, r):
        rho = self.rho
        return (2.0 - 2.0 * rho) / (2.0 - rho) + np.asarray(r) / (2.0 - rho)

    def g_inv(self, s):
        rho = self.rho
        return (2.0 - rho) * np.asarray(s) - (2.0 - 2.0 * rho)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        shell = (r >= self.rho) & (r < 2.0)
        inner = r < self.rho
        safe = np.where(r > 0, r, 1.0)
        out = np.where(shell, self.g(r) * x / safe, x)
        return np.where(inner, x / self.rho, out)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        s = np.linalg.norm(y, axis=-1, keepdims=True)
        shell = (s >= 1.0) & (s < 2.0)
        inner = s < 1.0
        safe = np.where(s > 0, s, 1.0)
        out = np.where(shell, self.g_inv(s) * y / safe, y)
        return np.where(inner, self.rho * y, out)

    def jacobian(self, x):
        """``DF_rho(x)`` with shape ``(..., 3, 3)``."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        eye = np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3))
        safe = np.where(r > 0, r, 1.0)
        xh = x / safe[..., None]
        proj = xh[..., :, None] * xh[..., None, :]
        shell_jac = self.slope * proj + (self.g(r) / safe)[..., None, None] * (eye - proj)
        shell = ((r >= self.rho) & (r < 2.0))[..., None, None]
        inner = (r < self.rho)[..., None, None]
        out = np.where(shell, shell_jac, eye)
        return np.where(inner, eye / self.rho, out)


def eval_F(rho, x):
    """``F_rho(x)`` for points of shape ``(..., 3)``."""
    return TransformMap(rho).forward(x)


def eval_Finv(rho, y):
    """``F_rho^{-1}(y)``."""
    return TransformMap(rho).inverse(y)


def jacobian(rho, x):
    return TransformMap(rho).jacobian(x)


@dataclass(frozen=True)
class MaterialSample:
    """
    A symmetric material tensor at one point, stored by its eigen-split.

    For radially symmetric media ``tensor = radial * d d^T +
    tangential * (I - d d^T)`` with ``d`` the unit radial direction.  An
    explicit ``matrix`` overrides this (user-supplied interior tensors).
    """

    region: Region
    eigen_radial: float
    eigen_tangential: float
    direction: tuple = (0.0, 0.0, 1.0)
    matrix: np.ndarray | None = None

    @property
    def tensor(self):
        if self.matrix is not None:
            return np.array(self.matrix, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        proj = np.outer(d, d)
        return self.eigen_radial * proj + self.eigen_tangential * (np.eye(3) - proj)

    @property
    def determinant(self):
        if self.matrix is not None:
            return float(np.linalg.det(self.matrix))
        return self.eigen_radial * self.eigen_tangential**2


def _direction(p):
    p = np.asarray(p, dtype=float)
    n = np.linalg.norm(p)
    return tuple(p / n) if n > 0 else (0.0, 0.0, 1.0)


def pushforward_identity_tensor(rho, y):
    """
    ``(F_rho)_* I`` at a point ``y`` of the cloak shell ``1 <= |y| <= 2``.

    Raises
    ------
    ConfigurationError
        If ``y`` lies outside the shell or ``rho`` outside ``(0, 1/2)``.
    """
    fmap = TransformMap(rho)
    y = np.asarray(y, dtype=float)
    s = float(np.linalg.norm(y))
    if not 1.0 <= s <= 2.0:
        raise ConfigurationError(f"|y| = {s} is outside the cloak shell [1, 2]")
    r = float(fmap.g_inv(s))
    gp = fmap.slope
    return MaterialSample(
        region=Region.CLOAK_SHELL,
        eigen_radial=gp * r * r / (s * s),
        eigen_tangential=1.0 / gp,
        direction=_direction(y),
    )


def _user_tensor(callback, point, scale, region):
    mat = np.asarray(callback(np.asarray(point, dtype=float)), dtype=float) * scale
    if mat.shape != (3, 3) or not np.allclose(mat, mat.T):
        raise ConfigurationError("material callback must return a symmetric 3x3 matrix")
    d = np.asarray(_direction(point))
    radial = float(d @ mat @ d)
    tangential = float((np.trace(mat) - radial) / 2.0)
    return MaterialSample(region, radial, tangential, tuple(d), mat)


def cloak_material(rho, y, interior=None):
    """
    ``eps_c`` (equally ``mu_c``) at ``y``: identity outside ``B_2``, the
    push-forward in the shell, and the cloaked object's tensor in ``B_1``.

    ``interior`` is an optional callback ``y -> 3x3``; identity by default.
    """
    check_rho(rho)
    s = float(np.linalg.norm(y))
    if s >= 2.0:
        return MaterialSample(Region.EXTERIOR, 1.0, 1.0, _direction(y))
    if s >= 1.0:
        return pushforward_identity_tensor(rho, y)
    if interior is None:
        return MaterialSample(Region.CLOAKED, 1.0, 1.0, _direction(y))
    return _user_tensor(interior, y, 1.0, Region.CLOAKED)


def equivalent_material(rho, x, interior=None):
    """
    The small-inclusion medium seen after pulling the cloak back by ``F_rho``.

    Identity outside ``B_rho``; ``rho^{-1} eps(x / rho)`` inside, where
    ``eps`` is ``interior`` (a callback) or the identity.
    """
    rho = check_rho(rho)
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r >= rho:
        return MaterialSample(Region.EXTERIOR, 1.0, 1.0, _direction(x))
    if interior is None:
        return MaterialSample(Region.INCLUSION, 1.0 / rho, 1.0 / rho, _direction(x))
    return _user_tensor(interior, x / rho, 1.0 / rho, Region.INCLUSION)


def push_field(rho, field, y):
    """
    Push a field forward, ``(F_* E)(y) = DF(x)^{-T} E(x)`` with ``x = F^{-1}(y)``.

    Parameters
    ----------
    rho : float
    field : callable
        Maps points of shape ``(..., 3)`` to complex vectors of the same shape.
    y : array_like, shape ``(..., 3)``
    """
    fmap = TransformMap(rho)
    x = fmap.inverse(y)
    e = np.asarray(field(x))
    jac = fmap.jacobian(x)
    return np.linalg.solve(np.swapaxes(jac, -1, -2), e[..., None])[..., 0]
