r"""Modal time-domain solvers for the damped (Westervelt) wave equation.

The spatial discretisation is a Faedo-Galerkin truncation in the eigenbasis of
:math:`\mathcal{A} = -\partial_x^2`. For the general linear equation

.. math::

    (1-\sigma)u_{tt} + c^2\mathcal{A}u + Du + \mu u_t + \rho u = h

the modal coefficients satisfy

.. math::

    (I - S(t))\,\ddot{\mathbf u} + D_\Lambda[\mathbf u] + M(t)\dot{\mathbf u}
    + (c^2\Lambda + R(t))\mathbf u = \mathbf h,

with Galerkin matrices ``S, M, R`` of the multiplication operators. Time
stepping uses the average-acceleration Newmark scheme. A Caputo derivative of
the displacement is evaluated as the Abel integral of order ``1 - alpha`` of
the piecewise-linear Newmark velocity (second order); the FZ term uses L1
weights on the acceleration. In both cases the newest node is implicit.

Two damping families are supported:

``CWCH``
    :math:`D = b\mathcal{A}^\beta\partial_t^\alpha`
``FZ``
    :math:`D = b_1\mathcal{A}\partial_t^{\alpha_1} + b_2\partial_t^{\alpha_2+2}`,
    where the last term is evaluated as :math:`\partial_t^{\alpha_2}` of the
    acceleration with zero initial acceleration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    BlowUpError,
    DivergenceError,
    DomainError,
    ModelError,
    NonContractionError,
    NumericalError,
    ShapeError,
)
from .fracops import TimeGrid, abel_weights, l1_weights
from .spectral import SpectralBasis, project

__all__ = [
    "CWCH",
    "FZ",
    "DampingModel",
    "LinearCoefficients",
    "ModalTrajectory",
    "ObservationTrace",
    "solve_linear",
    "solve_westervelt",
    "solve_linearized",
    "observe",
]

log = logging.getLogger(__name__)

SIGMA_BAR = 0.9
"""Largest admissible value of ``sigma`` (so ``1 - sigma >= 0.1``)."""


@dataclass(frozen=True)
class CWCH:
    """Caputo-Wismer / Chen-Holm damping ``b A^beta d_t^alpha``."""

    b: float
    beta: float
    alpha: float

    def __post_init__(self):
        if not self.b >= 0:
            raise ModelError(f"CWCH damping needs b >= 0, got {self.b}")
        if not 0.0 <= self.beta <= 1.0:
            raise ModelError(f"CWCH damping needs beta in [0, 1], got {self.beta}")
        if not 0.0 < self.alpha <= 1.0:
            raise ModelError(f"CWCH damping needs alpha in (0, 1], got {self.alpha}")

    kind = "cwch"

    def validate(self, c: float) -> None:
        if not c > 0:
            raise ModelError(f"wave speed must be positive, got {c}")


@dataclass(frozen=True)
class FZ:
    """Fractional Zener damping ``b1 A d_t^alpha1 + b2 d_t^(alpha2 + 2)``.

    The physical constraint ``b1 >= c^2 b2`` depends on the wave speed and is
    checked by :meth:`validate`; set ``unphysical=True`` to permit ``delta < 0``.
    """

    b1: float
    b2: float
    alpha1: float
    alpha2: float
    unphysical: bool = False

    kind = "fz"

    def __post_init__(self):
        if not self.b1 >= 0:
            raise ModelError(f"FZ damping needs b1 >= 0, got {self.b1}")
        if not self.b2 > 0:
            raise ModelError(f"FZ damping needs b2 > 0, got {self.b2}")
        for name in ("alpha1", "alpha2"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0:
                raise ModelError(f"FZ damping needs {name} in (0, 1], got {val}")
        if self.alpha1 < self.alpha2:
            raise ModelError("FZ damping needs alpha1 >= alpha2")

    @classmethod
    def from_delta(cls, b2: float, delta: float, c: float, alpha1: float, alpha2=None, **kw):
        """Parametrise by ``delta = b1 - c^2 b2`` instead of ``b1``."""
        alpha2 = alpha1 if alpha2 is None else alpha2
        return cls(b1=b2 * c * c + delta, b2=b2, alpha1=alpha1, alpha2=alpha2, **kw)

    def delta(self, c: float) -> float:
        return self.b1 - c * c * self.b2

    def validate(self, c: float) -> None:
        if not c > 0:
            raise ModelError(f"wave speed must be positive, got {c}")
        # tolerance absorbs rounding in b2 * c^2 + delta
        if self.delta(c) < -1e-12 * max(1.0, self.b1) and not self.unphysical:
            raise ModelError(
                f"FZ damping needs b1 >= c^2 b2 (delta = {self.delta(c):.3e} < 0); "
                "pass unphysical=True to override"
            )


DampingModel = Union[CWCH, FZ]


@dataclass
class LinearCoefficients:
    """Space-time coefficients of the general linear equation.

    ``sigma``, ``mu``, ``rho`` are sampled on ``(time nodes, spatial nodes)``
    or ``None`` for zero. ``h`` is the *modal* forcing with shape
    ``(time nodes, n_modes)``; use :func:`fracwest.spectral.project` to
    convert grid samples.
    """

    sigma: np.ndarray | None = None
    mu: np.ndarray | None = None
    rho: np.ndarray | None = None
    h: np.ndarray | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.sigma is None and self.mu is None and self.rho is None


@dataclass
class ModalTrajectory:
    """Modal coefficients ``u[i, j] = u_j(t_i)`` with velocity and acceleration."""

    basis: SpectralBasis
    grid: TimeGrid
    u: np.ndarray = field(repr=False)
    ut: np.ndarray = field(repr=False)
    utt: np.ndarray = field(repr=False)
    iterations: int = 1
    increments: list = field(default_factory=list, repr=False)

    def physical(self, which: str = "u") -> np.ndarray:
        """Grid samples of ``u``, ``ut`` or ``utt``: shape ``(n_t, n_x + 1)``."""
        return getattr(self, which) @ self.basis.phi.T

    def energy(self, c: float) -> np.ndarray:
        """``0.5 * (||u_t||^2 + c^2 ||grad u||^2)`` at every time node."""
        return 0.5 * np.sum(self.ut**2 + c * c * self.basis.lambdas * self.u**2, axis=-1)

    def linf_l2(self) -> float:
        """``max_t ||u(t)||_{L^2}``."""
        return float(np.max(np.linalg.norm(self.u, axis=-1)))


@dataclass
class ObservationTrace:
    x0: float
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t


class _VelocityMemory:
    """Caputo derivative of ``u`` as ``I^(1-alpha)`` of the nodal velocity."""

    def __init__(self, alpha: float, grid: TimeGrid):
        gamma = 1.0 - alpha
        near, far = abel_weights(gamma, grid.n_steps + 1)
        self.scale = grid.dt**gamma / math.gamma(gamma)
        self.implicit = near[1]
        self.near = near
        # weight of v[k - d] for d >= 1, before the correction at node 0
        self.lagged = far.copy()
        self.lagged[:-1] += near[1:]
        self.lagged[0] = 0.0

    def history(self, v: np.ndarray, k: int) -> np.ndarray:
        """Contribution of ``v[0..k-1]`` to the integral at node ``k``."""
        out = np.tensordot(self.lagged[k:0:-1], v[:k], axes=(0, 0))
        return out - self.near[k + 1] * v[0]


class _L1Memory:
    """L1 Caputo derivative of a nodal sequence with its own base point."""

    def __init__(self, alpha: float, grid: TimeGrid):
        scale, b = l1_weights(alpha, grid.n_steps)
        self.scale = scale * grid.dt ** (-alpha)
        self.w = b

    def history(self, increments: np.ndarray, n: int) -> np.ndarray:
        """``sum_{k<n} w[n-k] * increments[k]`` (zero when n == 0)."""
        if n == 0:
            return np.zeros(increments.shape[1:])
        return np.tensordot(self.w[n:0:-1], increments[:n], axes=(0, 0))


def _check_init(init, n_modes, batch_shape):
    shape = (n_modes,) + batch_shape
    if init is None:
        return np.zeros(shape), np.zeros(shape)
    u0, u1 = init[0], init[1]
    if len(init) > 2 and init[2] is not None and np.any(np.asarray(init[2]) != 0):
        raise ModelError("only zero initial acceleration (u2 = 0) is supported")
    out = []
    for v in (u0, u1):
        v = np.zeros(shape) if v is None else np.broadcast_to(np.asarray(v, float), shape)
        out.append(np.array(v, dtype=float))
    return out[0], out[1]


def solve_linear(
    model: DampingModel,
    coeffs: LinearCoefficients,
    basis: SpectralBasis,
    grid: TimeGrid,
    c: float = 1.0,
    init=None,
) -> ModalTrajectory:
    """Solve the general linear damped wave equation in modal form.

    Parameters
    ----------
    model : CWCH or FZ
        Damping operator.
    coeffs : LinearCoefficients
        ``sigma``, ``mu``, ``rho`` on the space-time grid and modal forcing
        ``h``. The forcing may carry a trailing batch axis, shape
        ``(n_t, n_modes, k)``, when the other coefficients are all ``None``.
    basis, grid : SpectralBasis, TimeGrid
    c : float
        Wave speed.
    init : tuple, optional
        Modal initial data ``(u0, u1)`` or ``(u0, u1, u2)``; ``u2`` must vanish.

    Returns
    -------
    ModalTrajectory
    """
    model.validate(c)
    n_t = len(grid)
    nm = basis.n_modes
    h = coeffs.h
    if h is None:
        h = np.zeros((n_t, nm))
    h = np.asarray(h, dtype=float)
    if h.shape[:2] != (n_t, nm):
        raise ShapeError(f"modal forcing must have shape ({n_t}, {nm}, ...), got {h.shape}")
    batch_shape = h.shape[2:]
    if batch_shape and not coeffs.is_diagonal:
        raise ShapeError("batched forcing requires sigma = mu = rho = None")
    for name in ("sigma", "mu", "rho"):
        arr = getattr(coeffs, name)
        if arr is not None and np.shape(arr) != (n_t, basis.x.size):
            raise ShapeError(f"{name} must have shape ({n_t}, {basis.x.size})")
    if coeffs.sigma is not None and np.max(coeffs.sigma) > SIGMA_BAR:
        raise ModelError(
            f"nondegeneracy violated: max sigma = {np.max(coeffs.sigma):.3f} > {SIGMA_BAR}"
        )
    u0, u1 = _check_init(init, nm, batch_shape)
    expand = (slice(None),) + (None,) * len(batch_shape)

    dt = grid.dt
    lam = basis.lambdas
    stiff = (c * c * lam)[expand]

    # per-mode coefficients of the fractional terms
    if isinstance(model, CWCH):
        terms_u = [(model.b * lam**model.beta, model.alpha)] if model.b > 0 else []
        term_a = None
    else:
        terms_u = [(model.b1 * lam, model.alpha1)] if model.b1 > 0 else []
        term_a = (model.b2, model.alpha2)

    frac_u = []
    for coef, alpha in terms_u:
        mem = None if alpha == 1.0 else _VelocityMemory(alpha, grid)
        frac_u.append((coef[expand], alpha, mem))
    frac_a = None
    if term_a is not None:
        mem = None if term_a[1] == 1.0 else _L1Memory(term_a[1], grid)
        frac_a = (term_a[0], term_a[1], mem)

    u = np.zeros((n_t, nm) + batch_shape)
    v = np.zeros_like(u)
    a = np.zeros_like(u)
    da = np.zeros((n_t - 1, nm) + batch_shape)
    u[0], v[0] = u0, u1

    diag = coeffs.is_diagonal
    if not diag:
        wphi = basis.weighted_phi()
        phi = basis.phi

        def gram(arr, n):
            if arr is None:
                return None
            return phi.T @ (arr[n][:, None] * wphi)

    # initial acceleration
    if frac_a is not None:
        a[0] = 0.0
    else:
        rhs0 = h[0] - stiff * u[0]
        for coef, alpha, _ in frac_u:
            if alpha == 1.0:
                rhs0 = rhs0 - coef * v[0]
        if diag:
            a[0] = rhs0
        else:
            mat = np.eye(nm)
            S, M, R = gram(coeffs.sigma, 0), gram(coeffs.mu, 0), gram(coeffs.rho, 0)
            if S is not None:
                mat = mat - S
            if M is not None:
                rhs0 = rhs0 - M @ v[0]
            if R is not None:
                rhs0 = rhs0 - R @ u[0]
            a[0] = _solve(mat, rhs0)

    # step-independent implicit weights (diagonal part)
    beta_n, gamma_n = 0.25 * dt * dt, 0.5 * dt
    eff_diag = 1.0 + beta_n * stiff
    for coef, alpha, mem in frac_u:
        if mem is None:
            eff_diag = eff_diag + coef * gamma_n
        else:
            eff_diag = eff_diag + coef * mem.scale * mem.implicit * gamma_n
    if frac_a is not None:
        b2, alpha2, mem = frac_a
        eff_diag = eff_diag + (b2 / dt if mem is None else b2 * mem.scale * mem.w[0])

    for n in range(n_t - 1):
        u_pred = u[n] + dt * v[n] + beta_n * a[n]
        v_pred = v[n] + gamma_n * a[n]
        rhs = h[n + 1] - stiff * u_pred
        for coef, alpha, mem in frac_u:
            if mem is None:
                rhs = rhs - coef * v_pred
            else:
                hist = mem.history(v, n + 1)
                rhs = rhs - coef * mem.scale * (mem.implicit * v_pred + hist)
        if frac_a is not None:
            b2, alpha2, mem = frac_a
            if mem is None:
                rhs = rhs + (b2 / dt) * a[n]
            else:
                hist = mem.history(da, n)
                rhs = rhs - b2 * mem.scale * (-mem.w[0] * a[n] + hist)

        if diag:
            a_new = rhs / eff_diag
        else:
            mat = np.diag(eff_diag)
            S, M, R = gram(coeffs.sigma, n + 1), gram(coeffs.mu, n + 1), gram(coeffs.rho, n + 1)
            if S is not None:
                mat = mat - S
            if M is not None:
                mat = mat + gamma_n * M
                rhs = rhs - M @ v_pred
            if R is not None:
                mat = mat + beta_n * R
                rhs = rhs - R @ u_pred
            a_new = _solve(mat, rhs)

        a[n + 1] = a_new
        u[n + 1] = u_pred + beta_n * a_new
        v[n + 1] = v_pred + gamma_n * a_new
        da[n] = a[n + 1] - a[n]

    if not np.all(np.isfinite(u)):
        raise DivergenceError("time stepping produced non-finite values")
    return ModalTrajectory(basis, grid, u, v, a)


def _solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular step matrix: {exc}") from exc


def _is_zero(kappa: np.ndarray) -> bool:
    return not np.any(kappa)


def solve_westervelt(
    kappa,
    r: np.ndarray,
    model: DampingModel,
    basis: SpectralBasis,
    grid: TimeGrid,
    c: float = 1.0,
    fp_tol: float = 1e-10,
    fp_max_iter: int = 50,
    initial_guess: ModalTrajectory | None = None,
    degeneracy_floor: float = 0.1,
    init=None,
) -> ModalTrajectory:
    r"""Solve :math:`u_{tt} + c^2\mathcal{A}u + Du = \kappa (u^2)_{tt} + r`.

    Each fixed-point sweep freezes the previous iterate ``v`` in the
    quasilinear terms,

    .. math:: (1-2\kappa v)u_{tt} - 2\kappa v_t u_t + c^2\mathcal{A}u + Du = r,

    and stops once ``max_t ||u_new - u_old|| <= fp_tol * max_t ||u_new||``.

    ``r`` is the modal forcing, shape ``(n_t, n_modes)``; ``init`` holds
    optional modal Cauchy data ``(u0, u1)`` (default: start from rest). The returned
    trajectory records the number of sweeps in ``iterations`` and the
    successive increments in ``increments``.

    Raises
    ------
    BlowUpError
        If ``1 - 2 kappa v`` drops below ``degeneracy_floor`` anywhere.
    NonContractionError
        If the sweeps have not converged after ``fp_max_iter`` iterations.
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != basis.x.shape:
        raise ShapeError(f"kappa must be sampled on the basis grid {basis.x.shape}")
    base = LinearCoefficients(h=r)
    if _is_zero(kappa):
        traj = solve_linear(model, base, basis, grid, c, init)
        traj.iterations = 1
        return traj

    current = initial_guess
    if current is None:
        current = solve_linear(model, base, basis, grid, c, init)
    increments = []
    for it in range(1, fp_max_iter + 1):
        vphys = current.physical("u")
        sigma = 2.0 * kappa * vphys
        worst = 1.0 - np.max(sigma)
        if worst < degeneracy_floor:
            raise BlowUpError(
                f"degenerate iterate: min(1 - 2 kappa u) = {worst:.3g} < {degeneracy_floor}"
            )
        mu = -2.0 * kappa * current.physical("ut")
        new = solve_linear(
            model, LinearCoefficients(sigma=sigma, mu=mu, h=r), basis, grid, c, init
        )
        diff = float(np.max(np.linalg.norm(new.u - current.u, axis=-1)))
        size = new.linf_l2()
        increments.append(diff)
        log.debug("fixed point sweep %d: increment %.3e", it, diff)
        current = new
        if diff <= fp_tol * size:
            current.iterations = it
            current.increments = increments
            return current
    raise NonContractionError(
        f"fixed point did not converge in {fp_max_iter} sweeps (last increment {increments[-1]:.3e})"
    )


def linearized_coefficients(
    kappa, u: ModalTrajectory, dkappa, basis: SpectralBasis
) -> LinearCoefficients:
    """Coefficients of the Westervelt linearisation in direction ``dkappa``."""
    kappa = np.asarray(kappa, dtype=float)
    dkappa = np.asarray(dkappa, dtype=float)
    up, vp, ap = u.physical("u"), u.physical("ut"), u.physical("utt")
    h = project(basis, 2.0 * dkappa * (up * ap + vp * vp))
    if _is_zero(kappa):
        return LinearCoefficients(h=h)
    return LinearCoefficients(sigma=2.0 * kappa * up, mu=-4.0 * kappa * vp, rho=-2.0 * kappa * ap, h=h)


def solve_linearized(
    kappa,
    u: ModalTrajectory,
    dkappa,
    model: DampingModel,
    basis: SpectralBasis,
    grid: TimeGrid,
    c: float = 1.0,
) -> ModalTrajectory:
    r"""Directional derivative ``z = G'(kappa) dkappa`` of the parameter-to-state map.

    Solves, from rest,

    .. math::

        (1-2\kappa u)z_{tt} - 4\kappa u_t z_t - 2\kappa u_{tt} z
        + c^2\mathcal{A}z + Dz = 2\,\delta\kappa\,(u u_{tt} + u_t^2),

    where ``u`` is the state at ``kappa``.
    """
    coeffs = linearized_coefficients(kappa, u, dkappa, basis)
    return solve_linear(model, coeffs, basis, grid, c)


def observe(u: ModalTrajectory, x0: float) -> ObservationTrace:
    """Time trace ``u(x0, t)`` using the analytic eigenfunctions at ``x0``."""
    if not 0.0 <= x0 <= 1.0:
        raise DomainError(f"observation point must lie in [0, 1], got {x0}")
    phi0 = u.basis.eval_modes(x0)
    return ObservationTrace(float(x0), u.grid, u.u @ phi0)
