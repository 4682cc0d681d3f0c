"""Fractionally damped Westervelt equation in one space dimension.

Modules
-------
fracops
    Abel integrals, Caputo derivatives and the coercivity check.
spectral
    Analytic eigenbasis of the negative Laplacian on (0, 1).
forward
    Modal time stepping for linear, nonlinear and linearised problems.
poles
    Poles and residues of the modal relaxation functions.
inversion
    Residue-based linear inversion from a single time trace.
recon
    Frozen-Newton reconstruction of the nonlinearity coefficient.
cli
    Command-line driver.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AssumptionViolation,
    BlowUpError,
    CertificationError,
    DivergenceError,
    DomainError,
    FracWestError,
    ModelError,
    MultipleRootError,
    NonContractionError,
    NumericalError,
    ResolutionError,
    ShapeError,
    SpecificationError,
)
from .forward import CWCH, FZ  # noqa: F401
from .fracops import Series, TimeGrid  # noqa: F401
from .spectral import BoundaryConfig, build_basis  # noqa: F401
