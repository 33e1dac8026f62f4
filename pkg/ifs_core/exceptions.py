"""Exceptions shared by every fractal_lab app.

Each error also derives from the nearest builtin so callers that only know
about ``ValueError`` and friends keep working.
"""


class FractalLabError(Exception):
    """Base class for all fractal_lab errors."""


class PathError(FractalLabError, ValueError):
    """A symbol word is not a composable path in the system."""


class StructureError(FractalLabError, ValueError):
    """A system is malformed (digraph not transitive, dimensions disagree...)."""


class DimensionMismatchError(FractalLabError, ValueError):
    """A point or subspace lives in the wrong ambient dimension."""


class PreconditionError(FractalLabError, ValueError):
    """An operation was called outside its domain."""


class ProvenanceError(FractalLabError, ValueError):
    """A point cloud carries no symbolic coding but one is required."""


class UnsupportedSystemError(FractalLabError, ValueError):
    """The system lacks a structural property the construction relies on."""


class ConsistencyError(FractalLabError, ArithmeticError):
    """An internal numerical identity failed to hold."""


class BudgetExceededError(FractalLabError, RuntimeError):
    """An enumeration would exceed its configured budget.

    ``feasible`` holds the nearest parameter value (for clouds, the smallest
    tried resolution) that fits inside the budget, when one is known.
    """

    def __init__(self, message, feasible=None, budget=None):
        super().__init__(message)
        self.feasible = feasible
        self.budget = budget
