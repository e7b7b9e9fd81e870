"""Steklov spectra of geodesic balls in harmonic model spaces and weighted isoperimetric checks."""
from .errors import (
    ClaimViolation,
    DomainError,
    NumericalError,
    SteklovError,
    TruncationError,
    UnsupportedModeError,
    UnsupportedSpaceError,
)
from .model_spaces import Family, ModelSpace, radial_functions
from .radial_series import ModeSpec, SteklovMode, get_mode, sigma_first_ball, sigma_ode_integrate
from .star_domains import DomainReport, StarDomain, measure_domain, random_star_domain, sphere_grid
from .inequalities import (
    check_bound_chain,
    check_stability,
    check_weighted_isoperimetric,
    falsification_sweep,
)
from .base_point import BoundarySample, ManifoldPoint, find_base_point, solve_base_point
from .strip import counterexample_scan, strip_sigma1

__version__ = "0.1.0"

__all__ = [
    "ClaimViolation", "DomainError", "NumericalError", "SteklovError", "TruncationError",
    "UnsupportedModeError", "UnsupportedSpaceError",
    "Family", "ModelSpace", "radial_functions",
    "ModeSpec", "SteklovMode", "get_mode", "sigma_first_ball", "sigma_ode_integrate",
    "DomainReport", "StarDomain", "measure_domain", "random_star_domain", "sphere_grid",
    "check_bound_chain", "check_stability", "check_weighted_isoperimetric", "falsification_sweep",
    "BoundarySample", "ManifoldPoint", "find_base_point", "solve_base_point",
    "counterexample_scan", "strip_sigma1",
]
