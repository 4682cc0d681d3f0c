"""Eigensystem of the negative Laplacian on (0, 1) and modal transforms.

Only the two boundary configurations needed by the solvers are supported and
their eigenpairs are used in closed form:

* Dirichlet at both ends: ``lambda_j = (j pi)^2``, ``phi_j = sqrt(2) sin(j pi x)``
* Dirichlet at 0, Neumann at 1: ``lambda_j = ((j - 1/2) pi)^2``,
  ``phi_j = sqrt(2) sin((j - 1/2) pi x)``

Inner products are computed with the trapezoidal rule on a uniform grid;
with ``n_x >= 8 * n_modes`` the discrete eigenfunctions are orthonormal to
rounding error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionError, ShapeError

__all__ = [
    "BoundaryConfig",
    "SpectralBasis",
    "build_basis",
    "project",
    "synthesize",
    "sobolev_norm",
]


class BoundaryConfig(enum.Enum):
    DIRICHLET_DIRICHLET = "dirichlet-dirichlet"
    DIRICHLET_NEUMANN = "dirichlet-neumann"

    @classmethod
    def parse(cls, value) -> "BoundaryConfig":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"dd": cls.DIRICHLET_DIRICHLET, "dn": cls.DIRICHLET_NEUMANN}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class SpectralBasis:
    """Truncated eigenbasis sampled on a uniform grid of ``n_x + 1`` nodes.

    Attributes
    ----------
    bc : BoundaryConfig
    lambdas : ndarray, shape (n_modes,)
        Eigenvalues, strictly increasing.
    x : ndarray, shape (n_x + 1,)
        Quadrature nodes.
    weights : ndarray, shape (n_x + 1,)
        Trapezoidal weights.
    phi : ndarray, shape (n_x + 1, n_modes)
        ``phi[i, j]`` is the j-th eigenfunction at ``x[i]``.
    """

    bc: BoundaryConfig
    lambdas: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return self.lambdas.size

    @property
    def n_x(self) -> int:
        return self.x.size - 1

    @property
    def frequencies(self) -> np.ndarray:
        """``sqrt(lambda_j)``, the spatial wavenumbers."""
        return np.sqrt(self.lambdas)

    def eval_modes(self, x0) -> np.ndarray:
        """Evaluate all eigenfunctions at arbitrary points ``x0``."""
        x0 = np.asarray(x0, dtype=float)
        return np.sqrt(2.0) * np.sin(np.multiply.outer(x0, self.frequencies))

    def weighted_phi(self) -> np.ndarray:
        """``W @ phi``: projecting a grid function is ``f @ weighted_phi()``."""
        return self.weights[:, None] * self.phi

    def gram_matrix(self, coeff: np.ndarray) -> np.ndarray:
        """Galerkin matrix ``<coeff * phi_i, phi_j>`` of a multiplication operator."""
        coeff = np.asarray(coeff, dtype=float)
        if coeff.shape != self.x.shape:
            raise ShapeError(f"coefficient must have shape {self.x.shape}")
        return self.phi.T @ ((self.weights * coeff)[:, None] * self.phi)


def build_basis(bc, n_modes: int, n_x: int | None = None) -> SpectralBasis:
    """Build the analytic eigenbasis.

    ``n_x`` defaults to ``8 * n_modes``; smaller grids are rejected.
    """
    bc = BoundaryConfig.parse(bc)
    if n_modes < 1:
        raise ResolutionError("n_modes must be at least 1")
    if n_x is None:
        n_x = 8 * n_modes
    if n_x < 8 * n_modes:
        raise ResolutionError(
            f"n_x = {n_x} is too coarse for {n_modes} modes (need n_x >= {8 * n_modes})"
        )
    j = np.arange(1, n_modes + 1, dtype=float)
    if bc is BoundaryConfig.DIRICHLET_DIRICHLET:
        k = j * np.pi
    else:
        k = (j - 0.5) * np.pi
    x = np.linspace(0.0, 1.0, n_x + 1)
    w = np.full(n_x + 1, 1.0 / n_x)
    w[0] = w[-1] = 0.5 / n_x
    phi = np.sqrt(2.0) * np.sin(np.outer(x, k))
    return SpectralBasis(bc, k**2, x, w, phi)


def project(basis: SpectralBasis, f) -> np.ndarray:
    """Modal coefficients ``<f, phi_j>`` of grid samples ``f``.

    A leading batch/time axis is allowed: ``f`` of shape ``(..., n_x + 1)``
    gives coefficients of shape ``(..., n_modes)``.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != basis.x.size:
        raise ShapeError(f"expected {basis.x.size} grid samples, got {f.shape[-1]}")
    return f @ basis.weighted_phi()


def synthesize(basis: SpectralBasis, coeffs) -> np.ndarray:
    """Grid samples of ``sum_j coeffs_j phi_j``; batch axes are preserved."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.n_modes:
        raise ShapeError(f"expected {basis.n_modes} coefficients, got {coeffs.shape[-1]}")
    return coeffs @ basis.phi.T


def sobolev_norm(basis: SpectralBasis, coeffs, s: float) -> float:
    """Norm ``(sum_j lambda_j^s c_j^2)^(1/2)`` of the spectral scale."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.n_modes,):
        raise ShapeError(f"expected {basis.n_modes} coefficients")
    return float(np.sqrt(np.sum(basis.lambdas**s * coeffs**2)))
