"""Damped Smagorinsky shear flow: wall damping profiles, explicit dissipation
bounds, and a staggered-grid solver to measure against them."""
from .bounds import BoundReport, corollary_bound, reference_rates, theorem_bound, traced_constants
from .core import DomainParams, Grid, VelocityField, make_domain, make_grid
from .damping import (
    DampingProfile,
    algebraic,
    constant,
    eval_beta,
    hermite,
    strip_integral,
    tabulated,
    van_driest,
)
from .dissipation import DissipationRecord, DissipationSeries, eps_instant, kinetic_energy
from .exceptions import SmagdampError
from .solver import DampedSmagorinskySolver, SolverConfig, SteadyShearProfile, advance, run, steady_shear_profile

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "DampedSmagorinskySolver",
    "DampingProfile",
    "DissipationRecord",
    "DissipationSeries",
    "DomainParams",
    "Grid",
    "SmagdampError",
    "SolverConfig",
    "SteadyShearProfile",
    "VelocityField",
    "advance",
    "algebraic",
    "constant",
    "corollary_bound",
    "eps_instant",
    "eval_beta",
    "hermite",
    "kinetic_energy",
    "make_domain",
    "make_grid",
    "reference_rates",
    "run",
    "steady_shear_profile",
    "strip_integral",
    "tabulated",
    "theorem_bound",
    "traced_constants",
    "van_driest",
]
