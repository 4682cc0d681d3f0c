"""Exception hierarchy shared by the solver modules."""

from __future__ import annotations


class FracWestError(Exception):
    """Base class for all package errors."""


class DomainError(FracWestError, ValueError):
    """An order or parameter lies outside the admissible range."""


class ShapeError(FracWestError, ValueError):
    """Array dimensions do not match the basis or time grid."""


class ResolutionError(FracWestError, ValueError):
    """The spatial grid is too coarse for the requested number of modes."""


class ModelError(FracWestError, ValueError):
    """Damping or coefficient data violate a model invariant."""


class NumericalError(FracWestError, ArithmeticError):
    """A linear system is singular or a computation produced NaN/inf."""


class DivergenceError(NumericalError):
    """The time stepper produced non-finite values."""


class BlowUpError(NumericalError):
    """The Westervelt iterate degenerated (1 - 2 kappa u became too small)."""


class NonContractionError(NumericalError):
    """The fixed-point iteration did not converge within the iteration cap."""


class CertificationError(NumericalError):
    """The argument-principle count disagrees with the poles found."""


class MultipleRootError(NumericalError):
    """The symbol derivative vanishes at a pole, so the pole is not simple."""


class AssumptionViolation(FracWestError, ValueError):
    """A hypothesis required for injectivity of the linearised map fails.

    The ``hypothesis`` attribute names the condition that failed.
    """

    def __init__(self, message: str, hypothesis: str):
        super().__init__(message)
        self.hypothesis = hypothesis


class SpecificationError(FracWestError, ValueError):
    """An input object lacks information required by the requested operation."""
