"""
Semi-analytic simulation of a regularised spherical transformation-optics
cloak, solved mode by mode in vector spherical harmonics.
"""
from .errors import ConfigurationError, ResonanceError, ScopeError, SolverError
from .experiments import (
    RateFit,
    Scenario,
    SweepRecord,
    fit_rate,
    interior_energy,
    l2_norm_annulus,
    limit_gap,
    run_sweep,
)
from .mode_solver import (
    InteriorSource,
    PlaneWaveSource,
    ScenarioConfig,
    compatibility,
    resonance_space,
    solve,
    solve_limit_interior,
)
from .specfun import bessel_j_zeros, sph_bessel_j, sph_bessel_y, sph_hankel1
from .transform import TransformMap, cloak_material, equivalent_material
from .vsh import ModeIndex, Polarization, build_quadrature

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ResonanceError",
    "ScopeError",
    "SolverError",
    "RateFit",
    "Scenario",
    "SweepRecord",
    "fit_rate",
    "interior_energy",
    "l2_norm_annulus",
    "limit_gap",
    "run_sweep",
    "InteriorSource",
    "PlaneWaveSource",
    "ScenarioConfig",
    "compatibility",
    "resonance_space",
    "solve",
    "solve_limit_interior",
    "bessel_j_zeros",
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel1",
    "TransformMap",
    "cloak_material",
    "equivalent_material",
    "ModeIndex",
    "Polarization",
    "build_quadrature",
]
