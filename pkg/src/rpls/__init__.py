"""Exact invariant densities of random piecewise-linear interval systems."""
from .density import invariant_densities, pf_apply, verify_invariant
from .fundamental import build_matrix, kernel
from .gallery import gallery
from .scalar import QuadraticNumber, golden_ratio, parse_scalar
from .stepfunc import StepFunction
from .system import RandomSystem, load_system, validate

__version__ = "0.1.0"

__all__ = [
    "QuadraticNumber",
    "RandomSystem",
    "StepFunction",
    "build_matrix",
    "gallery",
    "golden_ratio",
    "invariant_densities",
    "kernel",
    "load_system",
    "parse_scalar",
    "pf_apply",
    "validate",
    "verify_invariant",
]
