"""Numerics for Legendrian surfaces and varifolds in the Heisenberg group H^2."""
from .errors import DiagnosticError, DomainError, NotLegendrianError, ParseError
from .heisenberg import group_inv, group_mul, gauge, koranyi_dist
from .cutoff import CutoffProfile, make_cutoff
from .hamiltonian import LegendrianPlane
from .varifold import DiscreteVarifold, DensityReport, monotonicity_scan, density
from .grid import GridDomain
from .surfaces import GridSurface

__version__ = "0.1.0"

__all__ = [
    "CutoffProfile",
    "DensityReport",
    "DiagnosticError",
    "DiscreteVarifold",
    "DomainError",
    "GridDomain",
    "GridSurface",
    "LegendrianPlane",
    "NotLegendrianError",
    "ParseError",
    "__version__",
    "density",
    "gauge",
    "group_inv",
    "group_mul",
    "koranyi_dist",
    "make_cutoff",
    "monotonicity_scan",
]
