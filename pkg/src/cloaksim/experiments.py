"""
Norms of solved fields, rho-sweeps, and power-law fits of their decay.

Norms use the orthonormality of ``{Y xhat, U, V}``: on each sphere the
squared field norm is the sum of squared channel coefficients, so every
``L^2`` norm reduces to one-dimensional radial integrals.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mode_solver as ms
from .errors import ConfigurationError, SolverError
from .specfun import bessel_j_zeros
from .transform import check_rho
from .vsh import ModeIndex, Polarization

__all__ = [
    "Scenario",
    "DESIGNATED_FIELD",
    "SweepRecord",
    "RateFit",
    "default_rho_grid",
    "default_source",
    "first_resonance",
    "l2_norm_annulus",
    "interior_energy",
    "limit_gap",
    "limit_gap_curl",
    "fit_rate",
    "fit_power_law",
    "run_sweep",
]


class Scenario(str, enum.Enum):
    PLANE_WAVE = "plane_wave"
    INTERIOR_NONRESONANT = "interior_nonresonant"
    INTERIOR_RESONANT_INCOMPATIBLE = "interior_resonant_incompatible"
    INTERIOR_RESONANT_COMPATIBLE = "interior_resonant_compatible"


#: Which physical field the exterior norm of each scenario measures.
DESIGNATED_FIELD = {
    Scenario.PLANE_WAVE: "E",
    Scenario.INTERIOR_NONRESONANT: "H",
    Scenario.INTERIOR_RESONANT_INCOMPATIBLE: "E",
    Scenario.INTERIOR_RESONANT_COMPATIBLE: "E",
}

FIT_SKIP = 2


@dataclass(frozen=True)
class SweepRecord:
    rho: float
    scenario: Scenario
    exterior_norm: float
    interior_norm: float
    limit_gap: float | None = None
    limit_gap_curl: float | None = None
    residual: float = 0.0


@dataclass(frozen=True)
class RateFit:
    """Least-squares line ``log(value) = slope * log(rho) + intercept``."""

    slope: float
    intercept: float
    r_squared: float
    points_used: int


def default_rho_grid(start=2.0**-4, factor=0.5, steps=9):
    return [start * factor**i for i in range(steps)]


def first_resonance(n=1):
    """Smallest positive zero of ``j_n``."""
    return bessel_j_zeros(n, 1, 10.0 + 2.0 * n)[0].x


def default_source(scenario):
    """Sources used by the reference scenarios."""
    scenario = Scenario(scenario)
    if scenario is Scenario.PLANE_WAVE:
        return ms.PlaneWaveSource()
    if scenario is Scenario.INTERIOR_RESONANT_COMPATIBLE:
        return ms.InteriorSource(ModeIndex(2, 1, Polarization.TE))
    return ms.InteriorSource(ModeIndex(1, 1, Polarization.TE))


# ------------------------------------------------------------------ norms


def _gl(a, b, nodes):
    u, w = np.polynomial.legendre.leggauss(nodes)
    return a + 0.5 * (b - a) * (u + 1.0), 0.5 * (b - a) * w


def _adaptive(integrand, a, b, rtol=1e-12, start=32, max_nodes=512):
    nodes, prev = start, None
    while True:
        r, w = _gl(a, b, nodes)
        val = float(np.sum(w * integrand(r)))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        if nodes >= max_nodes:
            return val
        prev, nodes = val, 2 * nodes


def _sq(factors, which):
    comps = factors.electric if which == "E" else factors.magnetic
    return sum(np.abs(c) ** 2 for c in comps)


def _check_field(which):
    which = which.upper()
    if which not in ("E", "H", "EH"):
        raise ValueError("field must be 'E', 'H' or 'EH'")
    return which


def l2_norm_annulus(solution, r_in=2.0, r_out=4.0, field="E", physical=True):
    """
    ``L^2`` norm of the scattered field over ``r_in < |x| < r_out``.

    Parameters
    ----------
    solution : TransmissionSolution
    r_in, r_out : float
        Physical radii (``physical=True``, requires ``r_in >= 2`` where the
        cloak map is the identity) or frame radii (``physical=False``,
        requires ``r_in >= 1``).
    field : {"E", "H", "EH"}

    Notes
    -----
    Physical radius ``R`` corresponds to frame radius ``R / rho``; the
    scenario's ``exterior_scale`` converts frame to physical amplitudes.
    """
    which = _check_field(field)
    lo = 2.0 if physical else 1.0
    if not lo <= r_in < r_out:
        raise ConfigurationError(f"annulus radii must satisfy {lo} <= r_in < r_out")
    rho = solution.rho
    to_frame = 1.0 / rho if physical else 1.0
    scale = solution.exterior_scale if physical else 1.0

    def integrand(R):
        rf = R * to_frame
        total = np.zeros_like(R)
        for mode in solution.channels:
            fac = ms.eval_field(solution, rf, mode, side="exterior")
            for w in which:
                total += _sq(fac, w)
        return R * R * total

    val = _adaptive(integrand, r_in, r_out)
    return float(scale * np.sqrt(max(val, 0.0)))


def interior_energy(solution, field="EH"):
    """
    ``||(E_c, H_c)||_{L^2(B_1)}`` of the physical interior field.

    ``field="E"`` or ``"H"`` restricts to one of the two.
    """
    which = _check_field(field)

    def integrand(r):
        total = np.zeros_like(r)
        for mode in solution.channels:
            fac = ms.eval_field(solution, r, mode, side="interior")
            for w in which:
                total += _sq(fac, w)
        return r * r * total

    val = _adaptive(integrand, 0.0, 1.0)
    return float(solution.interior_scale * np.sqrt(max(val, 0.0)))


def _gap_parts(solution, limit):
    if limit.mode not in solution.channels:
        raise ValueError(f"solution carries no channel {limit.mode}")
    if abs(solution.omega - limit.omega) > 1e-14 * solution.omega:
        raise ValueError("solution and limit field are at different frequencies")
    s = np.sqrt(limit.mode.n * (limit.mode.n + 1.0))
    w = solution.omega

    def profiles(r):
        fs = ms.eval_field(solution, r, limit.mode, side="interior")
        fl = limit.factors(r)
        dE = [a - b for a, b in zip(fs.electric, fl.electric)]
        dH = [a - b for a, b in zip(fs.magnetic, fl.magnetic)]
        return dE, dH

    def l2(r):
        dE, dH = profiles(r)
        others = np.zeros_like(r)
        for mode in solution.channels:
            if mode != limit.mode:
                others += _sq(ms.eval_field(solution, r, mode, side="interior"), "E")
                others += _sq(ms.eval_field(solution, r, mode, side="interior"), "H")
        return r * r * (sum(np.abs(c) ** 2 for c in dE + dH) + others)

    def curl(r):
        # curl(f V) = -(s f / r) Y xhat - ((r f)' / r) U ; (r f)' / r = i w H_U
        # curl H = -i w E + J, and J is common to both fields
        dE, dH = profiles(r)
        dEv, dHu = dE[2], dH[1]
        return r * r * (np.abs(s * dEv / r) ** 2 + np.abs(w * dHu) ** 2 + np.abs(w * dEv) ** 2)

    return l2, curl


def limit_gap(solution, limit):
    """``L^2(B_1)`` distance between the solved interior field and the limit field."""
    l2, _ = _gap_parts(solution, limit)
    return float(np.sqrt(max(_adaptive(l2, 0.0, 1.0), 0.0)))


def limit_gap_curl(solution, limit):
    """``L^2(B_1)`` distance between the curls of the two fields."""
    _, curl = _gap_parts(solution, limit)
    return float(np.sqrt(max(_adaptive(curl, 0.0, 1.0), 0.0)))


# ------------------------------------------------------------------ fits


def fit_power_law(rhos, values):
    """Fit ``value ~ C rho^slope`` by least squares in log-log coordinates."""
    rhos = np.asarray(rhos, dtype=float)
    values = np.asarray(values, dtype=float)
    if rhos.size < 3:
        raise ValueError("a rate fit needs at least 3 points")
    if np.any(values <= 0) or np.any(rhos <= 0):
        raise ValueError("rate fit needs strictly positive rho and values")
    if np.ptp(rhos) == 0:
        raise ValueError("rate fit needs distinct rho values")
    x, y = np.log(rhos), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), int(rhos.size))


def fit_rate(records, column="exterior_norm", skip=0):
    """Fit one column of a sweep against ``rho``, dropping the first ``skip`` records."""
    rows = list(records)[skip:]
    return fit_power_law([r.rho for r in rows], [getattr(r, column) for r in rows])


# ----------------------------------------------------------------- sweeps


def _check_grid(rho_list):
    rhos = [check_rho(r) for r in rho_list]
    if len(rhos) < 5:
        raise ConfigurationError("a sweep needs at least 5 values of rho")
    ratios = np.array(rhos[1:]) / np.array(rhos[:-1])
    if np.any(ratios >= 1.0):
        raise ConfigurationError("rho must be strictly decreasing across a sweep")
    if np.ptp(ratios) > 1e-9 * ratios.mean():
        raise ConfigurationError("rho values must form a geometric sequence")
    return rhos


def _check_scenario(scenario, omega, source):
    if scenario is Scenario.PLANE_WAVE:
        if not isinstance(source, ms.PlaneWaveSource):
            raise ConfigurationError("plane_wave scenario needs a plane-wave source")
        return
    if not isinstance(source, ms.InteriorSource):
        raise ConfigurationError(f"{scenario.value} needs an interior source")
    space = ms.resonance_space(omega, max(20, source.mode.n + 4))
    if scenario is Scenario.INTERIOR_NONRESONANT:
        if not space.is_empty:
            raise ConfigurationError(f"omega={omega!r} is resonant; use a resonant scenario")
        return
    if space.is_empty:
        raise ConfigurationError(f"omega={omega!r} is not resonant")
    compatible = ms.is_compatible(ms.compatibility(source, space))
    want = scenario is Scenario.INTERIOR_RESONANT_COMPATIBLE
    if compatible != want:
        raise ConfigurationError(f"source is {'compatible' if compatible else 'incompatible'}; scenario {scenario.value} disagrees")


def _threads(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CLOAKSIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(scenario, omega, rho_list, source=None, threads=None):
    """
    Solve one scenario for every ``rho`` and collect norms.

    Records come back in the order of ``rho_list`` whatever the number of
    worker threads (``threads``, else ``CLOAKSIM_THREADS``, else the CPU
    count).

    Raises
    ------
    ConfigurationError
        Bad grid, or a source/frequency that does not fit the scenario.
    SolverError
        Propagated from the solver with the offending ``rho`` attached.
    """
    scenario = Scenario(scenario)
    rhos = _check_grid(rho_list)
    source = default_source(scenario) if source is None else source
    _check_scenario(scenario, omega, source)
    field = DESIGNATED_FIELD[scenario]
    limit = None
    if scenario is Scenario.INTERIOR_NONRESONANT:
        limit = ms.solve_limit_interior(source, omega)

    def one(rho):
        try:
            sol = ms.solve(ms.ScenarioConfig(rho, omega, source))
        except SolverError as exc:
            raise SolverError(f"rho={rho!r}: {exc}", mode=exc.mode) from exc
        gap = gap_curl = None
        if limit is not None:
            gap, gap_curl = limit_gap(sol, limit), limit_gap_curl(sol, limit)
        return SweepRecord(
            rho=rho,
            scenario=scenario,
            exterior_norm=l2_norm_annulus(sol, 2.0, 4.0, field=field),
            interior_norm=interior_energy(sol),
            limit_gap=gap,
            limit_gap_curl=gap_curl,
            residual=sol.max_residual,
        )

    workers = min(_threads(threads), len(rhos))
    if workers == 1:
        return [one(r) for r in rhos]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, rhos))
