"""L^q extremal polynomials for measures on analytic regions.

Build a :class:`RegionMeasure`, discretize it, solve for the monic extremal
polynomial and compare norms, zeros and Christoffel functions with their
predicted asymptotics.
"""

from .conformal import ExteriorMap, FaberPolynomial, faber, green_eval, phi_eval, psi_eval
from .errors import (
    ConditioningWarning,
    ConvergenceError,
    DegenerateMeasureError,
    DomainError,
    ExtremalLabError,
    ResolutionError,
    SymmetryError,
    TruncationError,
)
from .extremal import ExtremalSolution, OrthoBasis, eval_norm, orthonormal_sequence, solve_monic
from .measure import (
    AngularMeasure,
    Discretization,
    RadialMeasure,
    RegionMeasure,
    Weight,
    discretize,
    radial_moment,
)
from .polynomial import MonicPolynomial, poly_roots
from .szego import SzegoFunction, geometric_mean, predicted_limit

__all__ = [
    "AngularMeasure",
    "ConditioningWarning",
    "ConvergenceError",
    "DegenerateMeasureError",
    "Discretization",
    "DomainError",
    "ExteriorMap",
    "ExtremalLabError",
    "ExtremalSolution",
    "FaberPolynomial",
    "MonicPolynomial",
    "OrthoBasis",
    "RadialMeasure",
    "RegionMeasure",
    "ResolutionError",
    "SymmetryError",
    "SzegoFunction",
    "TruncationError",
    "Weight",
    "discretize",
    "eval_norm",
    "faber",
    "geometric_mean",
    "green_eval",
    "orthonormal_sequence",
    "phi_eval",
    "poly_roots",
    "predicted_limit",
    "psi_eval",
    "radial_moment",
    "solve_monic",
]
