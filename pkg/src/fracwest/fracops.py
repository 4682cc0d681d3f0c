r"""Discrete fractional calculus on uniform time grids.

Two product-integration kernels are provided, both based on a piecewise-linear
reconstruction of the sampled function:

* the Abel integral :math:`I_t^\gamma[v](t) = \frac{1}{\Gamma(\gamma)}
  \int_0^t (t-s)^{\gamma-1} v(s)\,ds` for :math:`0 < \gamma \le 1`;
* the Caputo derivative :math:`\partial_t^\alpha v = I_t^{1-\alpha}[v']` for
  :math:`0 < \alpha < 1` (the L1 scheme).

Both are exact whenever the samples come from a piecewise-linear function on
the grid. The solvers in :mod:`fracwest.forward` reuse the same weights in
incremental form, see :func:`abel_weights` and :func:`l1_weights`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "TimeGrid",
    "Series",
    "AlikhanovCheck",
    "abel_integral",
    "abel_weights",
    "caputo_derivative",
    "l1_weights",
    "verify_alikhanov",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i * dt`` on ``[0, t_final]`` with ``n_steps`` cells."""

    t_final: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError(f"n_steps must be an integer >= 2, got {self.n_steps}")
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise DomainError(f"t_final must be positive, got {self.t_final}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "t_final", float(self.t_final))

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_steps + 1)

    def __len__(self) -> int:
        return self.n_steps + 1


@dataclass(frozen=True)
class Series:
    """Scalar trajectory sampled at every node of a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ShapeError(
                f"expected {len(self.grid)} samples for this grid, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("series contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TimeGrid, func) -> "Series":
        return cls(grid, np.asarray(func(grid.t), dtype=float))


def abel_weights(gamma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights of the two endpoint values of each cell at distance ``m``.

    For a cell whose far end lies ``m`` steps before the evaluation node,
    ``near[m]`` multiplies the sample closer to the evaluation node and
    ``far[m]`` the other one. Index 0 is unused and set to zero.
    """
    m = np.arange(n + 2, dtype=float)
    mg = m**gamma
    mg1 = m ** (gamma + 1.0)
    p = np.zeros(n + 2)
    q = np.zeros(n + 2)
    p[1:] = (mg[1:] - mg[:-1]) / gamma
    q[1:] = (mg1[1:] - mg1[:-1]) / (gamma + 1.0)
    near = m * p - q
    far = q - (m - 1.0) * p
    near[0] = far[0] = 0.0
    return near, far


def abel_integral(v: Series, gamma: float) -> Series:
    r"""Abel integral :math:`I_t^\gamma v` by product integration.

    The integrand is interpolated linearly between nodes and the kernel
    :math:`(t-s)^{\gamma-1}` is integrated exactly, so the result is exact
    for piecewise-linear ``v`` and second order for smooth ``v``.

    Parameters
    ----------
    v : Series
        Samples of the integrand.
    gamma : float
        Order, ``0 < gamma <= 1``.

    Returns
    -------
    Series
        The integral at every node; node 0 is zero.
    """
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"Abel order must lie in (0, 1], got {gamma}")
    n = v.grid.n_steps
    vals = v.values
    near, far = abel_weights(gamma, n)
    # out[k] = sum_{m=1..k} near[m] v[k-m+1] + far[m] v[k-m]
    out = np.convolve(near, vals)[1 : n + 2] - near[1 : n + 2] * vals[0]
    out += np.convolve(far, vals)[: n + 1]
    out *= v.grid.dt**gamma / math.gamma(gamma)
    return Series(v.grid, out)


def l1_weights(alpha: float, n: int) -> tuple[float, np.ndarray]:
    r"""Scale and weights of the L1 discretisation of :math:`\partial_t^\alpha`.

    Returns ``(scale, b)`` with ``b[j] = (j+1)^(1-alpha) - j^(1-alpha)`` for
    ``j = 0..n-1``; the derivative at node ``k`` is
    ``scale * sum_{i<k} b[k-1-i] * (v[i+1] - v[i])`` with
    ``scale = 1 / Gamma(2 - alpha)`` (the ``dt**-alpha`` factor is left to the
    caller).
    """
    j = np.arange(n + 1, dtype=float)
    jp = j ** (1.0 - alpha)
    b = jp[1:] - jp[:-1]
    return 1.0 / math.gamma(2.0 - alpha), b


def caputo_derivative(v: Series, alpha: float) -> Series:
    r"""Caputo derivative of order ``0 < alpha < 1`` by the L1 scheme.

    ``v.values[0]`` is the base point, so constants map to zero. The scheme is
    exact on piecewise-linear data and tends to the backward difference
    quotient as ``alpha -> 1``.
    """
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"Caputo order must lie in (0, 1), got {alpha}")
    n = v.grid.n_steps
    scale, b = l1_weights(alpha, n)
    dv = np.diff(v.values)
    out = np.zeros(n + 1)
    out[1:] = np.convolve(b, dv)[:n]
    out *= scale * v.grid.dt ** (-alpha)
    return Series(v.grid, out)


class AlikhanovCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def verify_alikhanov(v: Series, alpha: float) -> AlikhanovCheck:
    r"""Check the coercivity bound of the Caputo derivative on ``[0, T]``.

    Evaluates

    .. math::

        \int_0^T \partial_t^\alpha v\, v'\,ds \;\ge\;
        \frac{1}{2\Gamma(\alpha)T^{1-\alpha}}
        \|\partial_t^\alpha v\|_{L^2(0,T)}^2

    for the piecewise-linear interpolant of ``v``. The left side is integrated
    exactly cell by cell, using that the antiderivative of
    :math:`\partial_t^\alpha v` is :math:`I_t^{1-\alpha}[v - v(0)]`; the
    right side uses the trapezoidal rule on the L1 nodal values.
    """
    alpha = float(alpha)
    grid = v.grid
    slopes = np.diff(v.values) / grid.dt
    anti = abel_integral(Series(grid, v.values - v.values[0]), 1.0 - alpha).values
    lhs = float(np.dot(slopes, np.diff(anti)))
    d = caputo_derivative(v, alpha).values
    l2sq = float(np.trapezoid(d * d, dx=grid.dt))
    rhs = l2sq / (2.0 * math.gamma(alpha) * grid.t_final ** (1.0 - alpha))
    tol = 1e-8 * (1.0 + abs(lhs))
    return AlikhanovCheck(lhs, rhs, bool(lhs >= rhs - tol))
