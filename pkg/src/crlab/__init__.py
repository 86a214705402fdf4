"""crlab: exact computations for CR submanifolds and CR maps."""

from .gaussian import GaussianRational, I, ONE, ZERO, as_gaussian
from .parser import PolySyntaxError, VariableContext, parse_poly
from .poly import PointAssignment, Poly, RationalExpr, Variable

__version__ = "0.1.0"

__all__ = [
    "GaussianRational", "I", "ONE", "ZERO", "as_gaussian",
    "PolySyntaxError", "VariableContext", "parse_poly",
    "PointAssignment", "Poly", "RationalExpr", "Variable",
]
