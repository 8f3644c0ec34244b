"""
Command-line front end.

Subcommands::

    cloaksim resonances    --n-max N --omega-max W [--tol T] [--format csv|json]
    cloaksim sweep         --scenario S --omega W [--rho-start R --rho-factor F --steps K]
                           [--source-n N --source-m M] [--out PATH] [--format csv|json]
    cloaksim material      --rho R [--samples K] [--mode cloak|equivalent] [--out PATH]
    cloaksim limit-compare --omega W [--n N --m M --rho-start R --steps K] [--out PATH]

Every subcommand accepts ``--config PATH``, a flat ``key=value`` file whose
keys mirror the long flags; flags on the command line win.

Exit codes: 0 success, 2 usage, 3 solver diagnostic, 4 scope guard.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import experiments as ex
from . import mode_solver as ms
from . import specfun as sf
from .errors import ConfigurationError, ResonanceError, ScopeError, SolverError
from .transform import check_rho, cloak_material, equivalent_material, eval_Finv
from .vsh import ModeIndex, Polarization

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_SCOPE = 4

SWEEP_COLUMNS = ("rho", "scenario", "exterior_norm", "interior_norm", "limit_gap")
RESONANCE_COLUMNS = ("n", "k", "omega")
MATERIAL_COLUMNS = ("radius", "eigen_radial", "eigen_tangential", "region")
LIMIT_COLUMNS = ("rho", "limit_gap_l2", "limit_gap_curl")

SNAP_TOL = 1e-6
_SNAP_ORDERS = 20
_OMEGA_MAX = 100.0


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    flags: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"


# ------------------------------------------------------------- formatting


def fmt(value):
    """Shortest round-trip text for a number; empty for ``None``."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv(columns, rows, trailer=()):
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(row[c]) for c in columns) + "\n")
    for line in trailer:
        buf.write(line + "\n")
    return buf.getvalue()


def _json(payload):
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _emit(text, out):
    """Write ``text`` to ``out`` atomically, or to stdout when ``out`` is None."""
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cloaksim-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _note(msg):
    print(msg, file=sys.stderr)


# -------------------------------------------------------------- validators


def _positive_float(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(val) or val <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text!r}")
    return val


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def snap_omega(omega, tol=SNAP_TOL, orders=_SNAP_ORDERS):
    """
    Nearest tabulated zero ``(n, k, x)`` of ``j_n``, ``n <= orders``, within
    ``tol`` of ``omega``; ``None`` when there is none.
    """
    best = None
    for n in range(1, orders + 1):
        for z in sf.bessel_j_zeros(n, 1000, omega + 2 * tol + 1.0):
            d = abs(z.x - omega)
            if d <= tol and (best is None or d < abs(best.x - omega)):
                best = z
    return best


def _snapped(omega):
    z = snap_omega(omega)
    if z is None:
        return omega, None
    if z.x != omega:
        _note(f"# snapped omega {fmt(omega)} -> {fmt(z.x)} (zero {z.k} of j_{z.n})")
    return z.x, z


def _check_omega(omega):
    if not 0.0 < omega <= _OMEGA_MAX:
        raise UsageError(f"--omega must lie in (0, {_OMEGA_MAX:g}]")


# ---------------------------------------------------------------- commands


def cmd_resonances(cfg):
    n_max, omega_max, tol = cfg.flags["n_max"], cfg.flags["omega_max"], cfg.flags["tol"]
    if not 1 <= n_max <= sf.MAX_ORDER:
        raise UsageError(f"--n-max must lie in [1, {sf.MAX_ORDER}]; resonances start at n = 1")
    if omega_max > _OMEGA_MAX:
        raise UsageError(f"--omega-max must not exceed {_OMEGA_MAX:g}")
    rows = []
    for n in range(1, n_max + 1):
        for z in sf.bessel_j_zeros(n, 10_000, omega_max, tol=tol):
            rows.append({"n": z.n, "k": z.k, "omega": z.x})
    rows.sort(key=lambda r: (r["omega"], r["n"]))
    if cfg.format == "json":
        return _json({"config": cfg.flags, "records": rows})
    return _csv(RESONANCE_COLUMNS, rows)


def _sweep_source(scenario, n, m):
    if scenario is ex.Scenario.PLANE_WAVE:
        if n is not None or m is not None:
            raise UsageError("--source-n/--source-m do not apply to plane_wave")
        return ms.PlaneWaveSource()
    default = ex.default_source(scenario).mode
    n = default.n if n is None else n
    m = default.m if m is None else m
    try:
        return ms.InteriorSource(ModeIndex(n, m, Polarization.TE))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fit_or_none(records, column):
    skip = ex.FIT_SKIP if len(records) - ex.FIT_SKIP >= 3 else 0
    try:
        return ex.fit_rate(records, column, skip=skip)
    except ValueError:
        return None


def cmd_sweep(cfg):
    f = cfg.flags
    scenario = ex.Scenario(f["scenario"])
    _check_omega(f["omega"])
    if f["steps"] < 5:
        raise UsageError("--steps must be at least 5")
    if not 0.0 < f["rho_factor"] < 1.0:
        raise UsageError("--rho-factor must lie in (0, 1)")
    omega = f["omega"]
    if scenario.value.startswith("interior_resonant"):
        omega, zero = _snapped(omega)
        if zero is None:
            raise UsageError(f"omega={fmt(omega)} is not within {SNAP_TOL:g} of a Bessel zero")
    source = _sweep_source(scenario, f["source_n"], f["source_m"])
    rhos = ex.default_rho_grid(f["rho_start"], f["rho_factor"], f["steps"])
    records = ex.run_sweep(scenario, omega, rhos, source)
    fit = _fit_or_none(records, "exterior_norm")
    ifit = _fit_or_none(records, "interior_norm")
    rows = [
        {"rho": r.rho, "scenario": r.scenario.value, "exterior_norm": r.exterior_norm,
         "interior_norm": r.interior_norm, "limit_gap": r.limit_gap}
        for r in records
    ]
    config = dict(f, omega=omega, scenario=scenario.value)
    if cfg.format == "json":
        payload = {
            "config": config,
            "records": rows,
            "fit": None if fit is None else {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared},
            "interior_fit": None if ifit is None else {"slope": ifit.slope, "intercept": ifit.intercept, "r_squared": ifit.r_squared},
        }
        return _json(payload)
    trailer = []
    if fit is not None:
        trailer.append(f"# slope={fmt(fit.slope)} r2={fmt(fit.r_squared)}")
    if ifit is not None:
        trailer.append(f"# interior_slope={fmt(ifit.slope)} r2={fmt(ifit.r_squared)}")
    return _csv(SWEEP_COLUMNS, rows, trailer)


def material_rows(rho, samples, mode="cloak"):
    """
    Material eigenvalues at ``samples`` radii on ``[0, 3]`` along the z-axis.

    ``mode="equivalent"`` reports the small-inclusion medium at the pulled
    back point ``F_rho^{-1}(y)``, so rows line up with the cloak rows.
    """
    rows = []
    for radius in np.linspace(0.0, 3.0, samples):
        y = np.array([0.0, 0.0, float(radius)])
        if mode == "cloak":
            mat = cloak_material(rho, y)
        else:
            mat = equivalent_material(rho, eval_Finv(rho, y))
        rows.append({
            "radius": float(radius),
            "eigen_radial": float(mat.eigen_radial),
            "eigen_tangential": float(mat.eigen_tangential),
            "region": mat.region.value,
        })
    return rows


def cmd_material(cfg):
    f = cfg.flags
    try:
        rho = check_rho(f["rho"])
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    if f["samples"] < 2:
        raise UsageError("--samples must be at least 2")
    rows = material_rows(rho, f["samples"], f["mode"])
    if cfg.format == "json":
        return _json({"config": f, "records": rows})
    return _csv(MATERIAL_COLUMNS, rows)


def cmd_limit_compare(cfg):
    f = cfg.flags
    _check_omega(f["omega"])
    if f["steps"] < 2:
        raise UsageError("--steps must be at least 2")
    omega, zero = _snapped(f["omega"])
    if zero is not None:
        raise ScopeError(
            f"omega={fmt(omega)} is a zero of j_{zero.n}: the resonant limit field is the "
            "non-local compatible-resonance problem, which is out of scope"
        )
    try:
        source = ms.InteriorSource(ModeIndex(f["n"], f["m"], Polarization.TE))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    limit = ms.solve_limit_interior(source, omega)
    rhos = ex.default_rho_grid(f["rho_start"], 0.5, f["steps"])
    rows = []
    for rho in rhos:
        check_rho(rho)
        sol = ms.solve(ms.ScenarioConfig(rho, omega, source))
        rows.append({"rho": rho, "limit_gap_l2": ex.limit_gap(sol, limit), "limit_gap_curl": ex.limit_gap_curl(sol, limit)})
    gaps = [r["limit_gap_l2"] for r in rows]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    if cfg.format == "json":
        return _json({"config": dict(f, omega=omega), "records": rows, "monotone_decrease": monotone})
    return _csv(LIMIT_COLUMNS, rows, [f"# monotone_decrease={fmt(monotone)}"])


COMMANDS = {
    "resonances": cmd_resonances,
    "sweep": cmd_sweep,
    "material": cmd_material,
    "limit-compare": cmd_limit_compare,
}


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(prog="cloaksim", description="Mode-by-mode simulations of a regularised spherical cloak.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="key=value file mirroring the long flags")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if out:
            p.add_argument("--out", help="output path (stdout when omitted)")

    p = sub.add_parser("resonances", help="tabulate resonant frequencies (zeros of j_n)")
    p.add_argument("--n-max", type=_int, required=True)
    p.add_argument("--omega-max", type=_positive_float, required=True)
    p.add_argument("--tol", type=_positive_float, default=sf.ROOT_TOL)
    common(p)

    p = sub.add_parser("sweep", help="solve one scenario over a geometric rho grid")
    p.add_argument("--scenario", choices=[s.value for s in ex.Scenario], required=True)
    p.add_argument("--omega", type=_positive_float, required=True)
    p.add_argument("--rho-start", type=_positive_float, default=2.0**-4)
    p.add_argument("--rho-factor", type=_positive_float, default=0.5)
    p.add_argument("--steps", type=_int, default=9)
    p.add_argument("--source-n", type=_int, default=None)
    p.add_argument("--source-m", type=_int, default=None)
    common(p)

    p = sub.add_parser("material", help="sample material eigenvalues along a radius")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--samples", type=_int, default=301)
    p.add_argument("--mode", choices=("cloak", "equivalent"), default="cloak")
    common(p)

    p = sub.add_parser("limit-compare", help="distance to the rho -> 0 interior limit")
    p.add_argument("--omega", type=_positive_float, required=True)
    p.add_argument("--n", type=_int, default=1)
    p.add_argument("--m", type=_int, default=1)
    p.add_argument("--rho-start", type=_positive_float, default=2.0**-4)
    p.add_argument("--steps", type=_int, default=7)
    common(p)
    parser.commands = dict(sub.choices)
    return parser


def read_config_file(path):
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = val
    return values


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv):
    parser = build_parser()
    path = _config_path(argv)
    command = next((tok for tok in argv if tok in parser.commands), None)
    if path is not None and command is not None:
        sub = parser.commands[command]
        known = {a.dest for a in sub._actions}
        file_values = read_config_file(path)
        unknown = sorted(set(file_values) - known - {"config"})
        if unknown:
            raise UsageError(f"unknown keys in {path}: {', '.join(unknown)}")
        for action in sub._actions:
            if action.dest in file_values:
                action.required = False
        # string defaults pass through each flag's type converter
        sub.set_defaults(**file_values)
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out", "format")}
    return RunConfig(command=args.command, flags=flags, out=args.out, format=args.format)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_args(argv)
        text = COMMANDS[cfg.command](cfg)
        _emit(text, cfg.out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError, OSError) as exc:
        _note(f"cloaksim: error: {exc}")
        return EXIT_USAGE
    except ScopeError as exc:
        _note(f"cloaksim: out of scope: {exc}")
        return EXIT_SCOPE
    except (SolverError, ResonanceError, ArithmeticError) as exc:
        _note(f"cloaksim: solver diagnostic: {exc}")
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
