"""Nonlinear reconstruction of the nonlinearity coefficient from one trace.

The unknown ``kappa`` is expanded in hat functions, the noisy samples are
smoothed by a cubic smoothing spline, and a Tikhonov-regularised Newton
iteration with a Jacobian frozen at ``kappa_0 = 0`` is stopped by the
discrepancy principle.

Misfits are root-mean-square values over the sample times, so the noise
level ``delta`` is the standard deviation of the per-sample noise.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, make_smoothing_spline

from .errors import BlowUpError, DivergenceError, DomainError, NonContractionError, NumericalError, ShapeError
from .forward import (
    DampingModel,
    LinearCoefficients,
    ModalTrajectory,
    ObservationTrace,
    linearized_coefficients,
    solve_linear,
    solve_westervelt,
)
from .fracops import TimeGrid
from .inversion import Excitation, build_excitation_source
from .spectral import SpectralBasis

__all__ = [
    "NoisyData",
    "ChapeauBasis",
    "SmoothingResult",
    "ReconstructionProblem",
    "NewtonConfig",
    "StopReason",
    "ReconstructionState",
    "ReconstructionAborted",
    "make_noisy_data",
    "smooth_trace",
    "assemble_jacobian",
    "frozen_newton",
    "svd_analysis",
    "SVDResult",
    "rms",
    "sample_times",
    "sample_trace",
]

log = logging.getLogger(__name__)


def rms(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


# --------------------------------------------------------------------------
# data


@dataclass
class NoisyData:
    """Noisy samples of a trace at uniform times on ``(0, T]``.

    ``noise_level`` is the relative amplitude of the uniform noise,
    ``values = clean + noise_level * max|clean| * U(-1, 1)``.
    """

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ShapeError("times and values must be 1-D arrays of equal length")
        if self.times.size < 10:
            raise DomainError(f"need at least 10 samples, got {self.times.size}")
        if not self.noise_level >= 0:
            raise DomainError("noise level must be non-negative")

    @property
    def n_samples(self) -> int:
        return self.times.size

    def noise_std(self) -> float:
        """Standard deviation of the uniform noise, estimated from the samples."""
        return self.noise_level * float(np.max(np.abs(self.values))) / math.sqrt(3.0)


def sample_times(t_final: float, n_samples: int = 50) -> np.ndarray:
    """Uniform sample times ``T * i / n`` for ``i = 1..n``."""
    return t_final * np.arange(1, n_samples + 1) / n_samples


def sample_trace(trace: ObservationTrace, times) -> np.ndarray:
    """Values of a trace at arbitrary times by cubic interpolation."""
    times = np.asarray(times, dtype=float)
    return CubicSpline(trace.t, trace.values)(times)


def make_noisy_data(
    trace: ObservationTrace, n_samples: int = 50, noise_level: float = 0.0, seed: int | None = 0
) -> NoisyData:
    """Sample ``trace`` at ``n_samples`` uniform times and add uniform noise."""
    times = sample_times(trace.grid.t_final, n_samples)
    clean = sample_trace(trace, times)
    rng = np.random.default_rng(seed)
    amp = noise_level * float(np.max(np.abs(clean)))
    noisy = clean + amp * rng.uniform(-1.0, 1.0, size=clean.size)
    return NoisyData(times, noisy, noise_level, seed)


# --------------------------------------------------------------------------
# smoothing


@dataclass
class SmoothingResult:
    """Smoothed trace on the working grid and the spline's fit statistics."""

    trace: ObservationTrace
    at_samples: np.ndarray = field(repr=False)
    lam: float
    misfit: float
    target: float
    noise_std: float


def smooth_trace(
    raw: NoisyData,
    grid: TimeGrid,
    noise_std: float | None = None,
    x0: float = float("nan"),
) -> SmoothingResult:
    r"""Cubic smoothing spline with the penalty chosen by Morozov's principle.

    Minimises :math:`\sum_i (g(t_i) - y_i)^2 + \mu\int (g'')^2` and picks
    ``mu`` by bisection in ``log mu`` so that the data misfit equals
    ``n_samples * noise_std**2``. With a zero noise estimate the interpolating
    cubic spline is returned. The spline is evaluated on the time grid.
    """
    t, y = raw.times, raw.values
    if noise_std is None:
        noise_std = raw.noise_std()
    target = t.size * noise_std**2
    if noise_std == 0.0:
        if np.ptp(y) == 0.0:
            log.warning("all samples are equal and no noise is assumed; returning the interpolant")
        spline = CubicSpline(t, y)
        lam, misfit = 0.0, 0.0
    else:
        def fit(log_lam):
            spl = make_smoothing_spline(t, y, lam=10.0**log_lam)
            return spl, float(np.sum((spl(t) - y) ** 2))

        span = float(t[-1] - t[0]) or 1.0
        lo, hi = math.log10(span**3) - 16.0, math.log10(span**3) + 8.0
        spline, misfit = fit(hi)
        if misfit <= target:
            lam = 10.0**hi
        else:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                spl, mis = fit(mid)
                if mis > target:
                    hi = mid
                else:
                    lo = mid
                if abs(mis - target) <= 1e-3 * target:
                    break
            lam = 10.0**mid
            spline, misfit = spl, mis
    values = spline(grid.t)
    return SmoothingResult(
        ObservationTrace(x0, grid, np.asarray(values, dtype=float)),
        np.asarray(spline(t), dtype=float),
        lam,
        misfit,
        target,
        noise_std,
    )


# --------------------------------------------------------------------------
# discretisation of kappa


@dataclass(frozen=True)
class ChapeauBasis:
    """Hat functions on ``n_basis`` uniform nodes of ``[0, 1]``."""

    n_basis: int = 40

    def __post_init__(self):
        if self.n_basis < 2:
            raise DomainError("need at least two hat functions")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_basis)

    def matrix(self, x) -> np.ndarray:
        """``eta_k(x_i)``, shape ``(len(x), n_basis)``."""
        x = np.asarray(x, dtype=float)
        h = 1.0 / (self.n_basis - 1)
        return np.clip(1.0 - np.abs(x[:, None] - self.nodes[None, :]) / h, 0.0, None)

    def evaluate(self, coeffs, x) -> np.ndarray:
        return self.matrix(x) @ np.asarray(coeffs, dtype=float)

    def interpolate(self, func) -> np.ndarray:
        """Coefficients of the nodal interpolant of ``func``."""
        return np.asarray(func(self.nodes), dtype=float)


# --------------------------------------------------------------------------
# forward map and Jacobian


@dataclass
class ReconstructionProblem:
    """Forward map ``coeffs -> u(x0, sample_times)`` for the separable excitation.

    The excitation source and Cauchy data are built once; every evaluation
    runs the nonlinear fixed-point solver.
    """

    model: DampingModel
    basis: SpectralBasis
    grid: TimeGrid
    exc: Excitation
    x0: float
    times: np.ndarray
    c: float = 1.0
    chapeau: ChapeauBasis = field(default_factory=ChapeauBasis)
    fp_tol: float = 1e-10
    fp_max_iter: int = 50

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        src = build_excitation_source(self.exc, self.model, self.basis, self.grid, self.c)
        self.r = src.r
        self.init = src.init
        self._hat = self.chapeau.matrix(self.basis.x)
        self._phi0 = self.basis.eval_modes(self.x0)
        self._last: ModalTrajectory | None = None

    @property
    def n_basis(self) -> int:
        return self.chapeau.n_basis

    def kappa(self, coeffs) -> np.ndarray:
        """``kappa`` on the spatial quadrature grid."""
        return self._hat @ np.asarray(coeffs, dtype=float)

    def state(self, coeffs, warm: bool = True) -> ModalTrajectory:
        guess = self._last if warm else None
        traj = solve_westervelt(
            self.kappa(coeffs), self.r, self.model, self.basis, self.grid, self.c,
            fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter,
            initial_guess=guess, init=self.init,
        )
        return traj

    def observe_samples(self, traj: ModalTrajectory) -> np.ndarray:
        trace = traj.u @ self._phi0
        return CubicSpline(self.grid.t, trace, axis=0)(self.times)

    def forward(self, coeffs) -> np.ndarray:
        traj = self.state(coeffs)
        self._last = traj
        return self.observe_samples(traj)


def assemble_jacobian(
    problem: ReconstructionProblem, kappa0=None, jobs: int = 1
) -> np.ndarray:
    """Frozen Jacobian, column ``k`` = linearised trace in direction ``eta_k``.

    At ``kappa0 = 0`` (the default) all columns share the diagonal modal
    operator and are computed in a single batched time loop; otherwise each
    column is an independent linearised solve, optionally run on ``jobs``
    threads.
    """
    nb = problem.n_basis
    coeffs0 = np.zeros(nb) if kappa0 is None else np.asarray(kappa0, dtype=float)
    if coeffs0.shape != (nb,):
        raise ShapeError(f"kappa0 must have {nb} coefficients")
    u = problem.state(coeffs0, warm=False)
    kap = problem.kappa(coeffs0)
    basis = problem.basis
    hat = problem._hat
    if not np.any(kap):
        up, vp, ap = u.physical("u"), u.physical("ut"), u.physical("utt")
        src = 2.0 * (up * ap + vp * vp)  # (n_t, n_x + 1)
        # h[t, m, k] = <src(t) * eta_k, phi_m>
        w = (hat * basis.weights[:, None])[:, :, None] * basis.phi[:, None, :]
        h = (src @ w.reshape(w.shape[0], -1)).reshape(src.shape[0], nb, -1)
        h = np.ascontiguousarray(h.transpose(0, 2, 1))
        traj = solve_linear(problem.model, LinearCoefficients(h=h), basis, problem.grid, problem.c)
        trace = np.einsum("tmk,m->tk", traj.u, problem._phi0)
        return CubicSpline(problem.grid.t, trace, axis=0)(problem.times)

    def column(k):
        try:
            coeffs = linearized_coefficients(kap, u, hat[:, k], basis)
            z = solve_linear(problem.model, coeffs, basis, problem.grid, problem.c)
        except NumericalError as exc:
            raise NumericalError(f"Jacobian column {k}: {exc}") from exc
        return problem.observe_samples(z)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(column, range(nb)))
    else:
        cols = [column(k) for k in range(nb)]
    return np.column_stack(cols)


# --------------------------------------------------------------------------
# frozen Newton


class StopReason(enum.Enum):
    DISCREPANCY = "Discrepancy"
    MAX_ITER = "MaxIter"
    STAGNATION = "Stagnation"


@dataclass(frozen=True)
class NewtonConfig:
    """Parameters of the regularised frozen Newton iteration.

    The Tikhonov parameter of step ``k`` is
    ``max(gamma0 * gamma_decay**k, gamma_floor) * sigma_1**2`` where
    ``sigma_1`` is the largest singular value of the Jacobian.
    """

    gamma0: float = 1e-2
    gamma_decay: float = 0.7
    gamma_floor: float = 1e-10
    tau: float = 1.5
    max_iter: int = 30
    max_backtrack: int = 10
    stagnation_tol: float = 1e-10


@dataclass
class ReconstructionState:
    kappa_coeffs: np.ndarray
    J: np.ndarray = field(repr=False)
    gamma: float = 0.0
    history: list[float] = field(default_factory=list)
    gammas: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list, repr=False)
    backtracks: list[int] = field(default_factory=list)
    stop_reason: StopReason | None = None
    target: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


class ReconstructionAborted(NumericalError):
    """The forward solver failed at every backtracking step."""

    def __init__(self, message: str, state: ReconstructionState):
        super().__init__(message)
        self.state = state


_SOLVER_FAILURES = (BlowUpError, NonContractionError, DivergenceError)


def frozen_newton(
    forward: Callable[[np.ndarray], np.ndarray] | ReconstructionProblem,
    J: np.ndarray,
    data,
    delta: float,
    config: NewtonConfig = NewtonConfig(),
    kappa0=None,
) -> ReconstructionState:
    r"""Regularised frozen Newton iteration with discrepancy stopping.

    .. math::

        \kappa_{k+1} = \kappa_k + t_k(J^TJ + \gamma_k I)^{-1}J^T(g - F(\kappa_k))

    where ``t_k = 2**-j`` is the first step length (``j <= max_backtrack``)
    that does not increase the misfit and for which the forward solver
    succeeds. The loop stops at the first iterate with
    ``rms(F(kappa_k) - g) <= tau * delta``, when the step is negligible or
    cannot be made to decrease the misfit (stagnation), or after
    ``max_iter`` steps.

    Raises
    ------
    ReconstructionAborted
        If the forward solver fails for every trial step of one iteration;
        the exception carries the state reached so far.
    """
    fwd = forward.forward if isinstance(forward, ReconstructionProblem) else forward
    J = np.asarray(J, dtype=float)
    g = np.asarray(data, dtype=float)
    n_s, nb = J.shape
    if g.shape != (n_s,):
        raise ShapeError(f"data must have {n_s} samples")
    coeffs = np.zeros(nb) if kappa0 is None else np.array(kappa0, dtype=float)

    U, sv, Vt = np.linalg.svd(J, full_matrices=False)
    s1sq = float(sv[0] ** 2) if sv.size and sv[0] > 0 else 1.0
    state = ReconstructionState(coeffs.copy(), J, target=config.tau * delta)
    resid = g - fwd(coeffs)
    mis = rms(resid)
    state.history.append(mis)
    state.iterates.append(coeffs.copy())

    for k in range(config.max_iter):
        if mis <= state.target:
            state.stop_reason = StopReason.DISCREPANCY
            break
        gam = max(config.gamma0 * config.gamma_decay**k, config.gamma_floor) * s1sq
        step = Vt.T @ ((sv / (sv * sv + gam)) * (U.T @ resid))
        if np.linalg.norm(step) <= config.stagnation_tol:
            state.stop_reason = StopReason.STAGNATION
            break
        t = 1.0
        accepted = False
        failures = 0
        for j in range(config.max_backtrack + 1):
            trial = coeffs + t * step
            try:
                r_trial = g - fwd(trial)
            except _SOLVER_FAILURES as exc:
                failures += 1
                log.info("iteration %d: solver failed at step %.3g (%s: %s)", k, t, type(exc).__name__, exc)
                t *= 0.5
                continue
            m_trial = rms(r_trial)
            if m_trial <= mis:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if failures == config.max_backtrack + 1:
                state.stop_reason = None
                raise ReconstructionAborted(
                    f"forward solver failed for all {failures} trial steps of iteration {k}",
                    state,
                )
            state.stop_reason = StopReason.STAGNATION
            break
        coeffs, resid, mis = trial, r_trial, m_trial
        state.gamma = gam
        state.gammas.append(gam)
        state.backtracks.append(j)
        state.history.append(mis)
        state.iterates.append(coeffs.copy())
        log.debug("iteration %d: misfit %.3e (gamma %.2e, %d halvings)", k, mis, gam, j)
    else:
        state.stop_reason = (
            StopReason.DISCREPANCY if mis <= state.target else StopReason.MAX_ITER
        )
    state.kappa_coeffs = coeffs
    return state


# --------------------------------------------------------------------------
# singular values


@dataclass
class SVDResult:
    sigma: np.ndarray

    def rows(self) -> list[tuple[int, float, float]]:
        """``(n, sigma_n, sigma_n / sigma_1)`` with ``n`` starting at 1."""
        s1 = self.sigma[0] if self.sigma.size and self.sigma[0] > 0 else 1.0
        return [(i + 1, float(s), float(s / s1)) for i, s in enumerate(self.sigma)]


def svd_analysis(J) -> SVDResult:
    """Singular values of ``J`` in descending order."""
    return SVDResult(np.linalg.svd(np.asarray(J, dtype=float), compute_uv=False))
