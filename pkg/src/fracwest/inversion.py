r"""Linear inversion of a nonlinearity perturbation from one time trace.

At :math:`\kappa = 0` the excitation ``r`` is chosen such that the state is
separable, :math:`u_0(x,t) = f(x)\chi(t)`. The linearised response ``z`` to a
perturbation :math:`\delta\kappa` then solves

.. math::

    z_{tt} + c^2\mathcal{A}z + Dz = \delta\kappa\,(u_0^2)_{tt}
        = \delta\kappa f^2\,\psi(t), \qquad \psi = (\chi^2)'',

so each mode is a scalar relaxation equation forced by
:math:`a_j\psi(t)` with :math:`a_j = \langle \delta\kappa f^2, \phi_j\rangle`.
The trace :math:`h(t) = z(x_0, t)` has Laplace transform
:math:`\sum_j a_j\phi_j(x_0)\hat\psi(s)/\omega(\lambda_j, s)`, so the residue at a
pole :math:`p_m` of mode ``m`` determines ``a_m``:

.. math::

    a_m = \frac{\operatorname{Res}(\hat h; p_m)}
               {\operatorname{Res}(1/\omega_m; p_m)\,\hat\psi(p_m)\,\phi_m(x_0)}.

The data residues are obtained by linear least squares against exponentials
at the known poles (:func:`extract_residues`).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AssumptionViolation, DomainError, ModelError, ShapeError, SpecificationError
from .forward import (
    CWCH,
    FZ,
    DampingModel,
    LinearCoefficients,
    ObservationTrace,
    solve_linear,
)
from .fracops import TimeGrid
from .poles import Pole, PoleSet, Symbol, find_poles, residue
from .spectral import SpectralBasis, project, synthesize

__all__ = [
    "TimeProfile",
    "LinearProfile",
    "CustomProfile",
    "Excitation",
    "ExcitationSource",
    "ResidueData",
    "Recovery",
    "build_excitation_source",
    "synthesize_trace",
    "laplace_trace",
    "LaplaceValue",
    "extract_residues",
    "recover_coefficients",
    "mode_poles",
    "report_dict",
    "forcing_coefficients",
    "masked_relative_error",
    "ModeResidues",
]

log = logging.getLogger(__name__)

HYPOTHESIS_THRESHOLD = 1e-10
CONDITION_WARNING = 1e10


# --------------------------------------------------------------------------
# time profiles


class TimeProfile:
    """Interface of the temporal factor ``chi`` of the separable state."""

    name = "abstract"

    def value(self, t):
        raise NotImplementedError

    def d1(self, t):
        raise NotImplementedError

    def d2(self, t):
        raise NotImplementedError

    def caputo(self, t, alpha: float):
        """Caputo derivative of order ``alpha`` in ``(0, 1]``."""
        raise NotImplementedError

    def caputo_of_d2(self, t, alpha: float):
        """Caputo derivative of order ``alpha`` of ``chi''`` (FZ term)."""
        raise NotImplementedError

    def psi(self, t):
        """``(chi^2)''``."""
        raise NotImplementedError

    def psi_hat(self, s):
        """Laplace transform of :meth:`psi`."""
        raise NotImplementedError


class LinearProfile(TimeProfile):
    """``chi(t) = t``: ``psi = 2`` and ``psi_hat(s) = 2 / s``."""

    name = "linear"

    def value(self, t):
        return np.asarray(t, dtype=float)

    def d1(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def d2(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def caputo(self, t, alpha: float):
        t = np.asarray(t, dtype=float)
        if alpha == 1.0:
            return np.ones_like(t)
        return t ** (1.0 - alpha) / math.gamma(2.0 - alpha)

    def caputo_of_d2(self, t, alpha: float):
        return np.zeros_like(np.asarray(t, dtype=float))

    def psi(self, t):
        return np.full_like(np.asarray(t, dtype=float), 2.0)

    def psi_hat(self, s):
        return 2.0 / np.asarray(s, dtype=complex)


@dataclass
class CustomProfile(TimeProfile):
    """User-supplied profile given by callables.

    ``caputo`` must accept ``(t, alpha)``; it and ``caputo_of_d2`` are needed
    only for damped models. ``psi_hat`` is needed only for inversion.
    """

    chi: Callable
    dchi: Callable
    ddchi: Callable
    psi_fn: Callable
    caputo_fn: Callable | None = None
    caputo_d2_fn: Callable | None = None
    psi_hat_fn: Callable | None = None
    name: str = "custom"

    def value(self, t):
        return np.asarray(self.chi(t), dtype=float)

    def d1(self, t):
        return np.asarray(self.dchi(t), dtype=float)

    def d2(self, t):
        return np.asarray(self.ddchi(t), dtype=float)

    def caputo(self, t, alpha):
        if alpha == 1.0:
            return self.d1(t)
        if self.caputo_fn is None:
            raise SpecificationError("custom time profile lacks its fractional derivative")
        return np.asarray(self.caputo_fn(t, alpha), dtype=float)

    def caputo_of_d2(self, t, alpha):
        if self.caputo_d2_fn is None:
            raise SpecificationError("custom time profile lacks the FZ derivative of chi''")
        return np.asarray(self.caputo_d2_fn(t, alpha), dtype=float)

    def psi(self, t):
        return np.asarray(self.psi_fn(t), dtype=float)

    def psi_hat(self, s):
        if self.psi_hat_fn is None:
            raise SpecificationError("custom time profile lacks the Laplace transform of psi")
        return np.asarray(self.psi_hat_fn(s), dtype=complex)


@dataclass
class Excitation:
    """Spatial profile ``f`` (sampled on the basis grid) and time profile ``chi``."""

    f: np.ndarray = field(repr=False)
    chi: TimeProfile = field(default_factory=LinearProfile)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if not np.all(np.isfinite(self.f)):
            raise DomainError("excitation profile contains non-finite values")
        small = np.count_nonzero(np.abs(self.f) < 1e-12)
        if small > 2:
            raise DomainError(
                f"excitation profile vanishes at {small} grid nodes; it may vanish "
                "only on a set of measure zero"
            )


@dataclass
class ExcitationSource:
    """Modal forcing ``r`` and the Cauchy data ``(f chi(0), f chi'(0))``."""

    r: np.ndarray = field(repr=False)
    init: tuple = field(repr=False)
    f_modal: np.ndarray = field(repr=False)


def _check_domain(exc: Excitation, basis: SpectralBasis, tail_tol: float) -> np.ndarray:
    if exc.f.shape != basis.x.shape:
        raise ShapeError(f"excitation profile must have shape {basis.x.shape}")
    coeffs = project(basis, exc.f)
    resid = exc.f - synthesize(basis, coeffs)
    scale = max(float(np.max(np.abs(exc.f))), 1e-300)
    tail = float(np.sqrt(np.sum(basis.weights * resid**2))) / scale
    if tail > tail_tol:
        raise ModelError(
            f"excitation profile is not resolved by {basis.n_modes} modes "
            f"(relative modal tail {tail:.2e} > {tail_tol:.0e})"
        )
    return coeffs


def build_excitation_source(
    exc: Excitation,
    model: DampingModel,
    basis: SpectralBasis,
    grid: TimeGrid,
    c: float = 1.0,
    tail_tol: float = 1e-8,
) -> ExcitationSource:
    r"""Forcing for which the damped linear solution is ``f(x) chi(t)``.

    .. math:: r = f\chi'' + c^2(\mathcal{A}f)\chi + D[f\chi]

    The fractional derivatives of ``chi`` are evaluated analytically; the
    returned Cauchy data must be passed to the solver together with ``r``.
    """
    model.validate(c)
    fj = _check_domain(exc, basis, tail_tol)
    t = grid.t
    lam = basis.lambdas
    chi = exc.chi
    r = np.outer(chi.d2(t), fj) + np.outer(chi.value(t), c * c * lam * fj)
    if isinstance(model, CWCH):
        if model.b > 0:
            r += model.b * np.outer(chi.caputo(t, model.alpha), lam**model.beta * fj)
    else:
        if model.b1 > 0:
            r += model.b1 * np.outer(chi.caputo(t, model.alpha1), lam * fj)
        if abs(float(chi.d2(np.array([0.0]))[0])) > 0:
            raise ModelError("FZ solver requires chi''(0) = 0")
        r += model.b2 * np.outer(chi.caputo_of_d2(t, model.alpha2), fj)
    t0 = np.array([0.0])
    init = (fj * float(chi.value(t0)[0]), fj * float(chi.d1(t0)[0]))
    return ExcitationSource(r=r, init=init, f_modal=fj)


def forcing_coefficients(dkappa, exc: Excitation, basis: SpectralBasis) -> np.ndarray:
    """``a_j = <dkappa * f^2, phi_j>``, the modal weights of ``dkappa (u0^2)_tt / psi``."""
    dkappa = np.asarray(dkappa, dtype=float)
    if dkappa.shape != basis.x.shape:
        raise ShapeError(f"dkappa must have shape {basis.x.shape}")
    return project(basis, dkappa * exc.f**2)


def synthesize_trace(
    dkappa,
    exc: Excitation,
    model: DampingModel,
    basis: SpectralBasis,
    grid: TimeGrid,
    x0: float,
    c: float = 1.0,
) -> ObservationTrace:
    """Trace of the linearised response at ``kappa = 0`` via the modal ODEs.

    Each mode solves ``z_j'' + c^2 lam_j z_j + D_j z_j = a_j psi(t)`` from
    rest, with ``a_j = <dkappa f^2, phi_j>``.
    """
    if not 0.0 <= x0 <= 1.0:
        raise DomainError(f"observation point must lie in [0, 1], got {x0}")
    a = forcing_coefficients(dkappa, exc, basis)
    h = np.outer(exc.chi.psi(grid.t), a)
    traj = solve_linear(model, LinearCoefficients(h=h), basis, grid, c)
    return ObservationTrace(float(x0), grid, traj.u @ basis.eval_modes(x0))


# --------------------------------------------------------------------------
# Laplace transform of data


@dataclass(frozen=True)
class LaplaceValue:
    value: complex
    truncation_bound: float


def laplace_trace(h: ObservationTrace, s: complex) -> LaplaceValue:
    """Trapezoidal approximation of ``int_0^T exp(-s t) h(t) dt``.

    ``truncation_bound`` bounds the neglected tail ``int_T^inf`` by
    ``||h||_inf exp(-Re(s) T) / Re(s)`` (assuming ``|h|`` stays bounded by its
    observed maximum); it is infinite for ``Re(s) <= 0``, where the result is
    only the finite-horizon integral.
    """
    s = complex(s)
    t = h.grid.t
    val = complex(np.trapezoid(np.exp(-s * t) * h.values, dx=h.grid.dt))
    if s.real > 0:
        bound = float(np.max(np.abs(h.values))) * math.exp(-s.real * h.grid.t_final) / s.real
    else:
        log.warning("Laplace transform at Re(s) = %.3g <= 0 uses the finite horizon only", s.real)
        bound = math.inf
    return LaplaceValue(val, bound)


# --------------------------------------------------------------------------
# residues from data


@dataclass
class ModeResidues:
    """Poles of one mode (upper half plane and real axis) and data residues."""

    mode: int
    poles: list[Pole]
    data_residues: np.ndarray


@dataclass
class ResidueData:
    modes: list[ModeResidues]
    static: float | None
    tail: np.ndarray
    fit_residual: float
    relative_residual: float
    condition: float
    ill_conditioned: bool
    t_min: float


def mode_poles(
    model: DampingModel, basis: SpectralBasis, n_modes: int, c: float = 1.0
) -> list[PoleSet]:
    """Certified pole sets of the first ``n_modes`` modes."""
    return [find_poles(Symbol(model, c, float(lam))) for lam in basis.lambdas[:n_modes]]


def _representatives(ps: PoleSet) -> list[Pole]:
    """One pole per conjugate pair plus all real poles."""
    return [p for p in ps.poles if p.s.imag >= 0.0]


def _fit_matrix(t, reps, static, tail_powers):
    cols, layout = [], []
    if static:
        cols.append(np.ones_like(t))
        layout.append(("static", None))
    for mi, plist in enumerate(reps):
        for pi, p in enumerate(plist):
            e = np.exp(p.s * t)
            if p.s.imag == 0.0:
                cols.append(e.real)
                layout.append(("real", (mi, pi)))
            else:
                cols.append(2.0 * e.real)
                cols.append(-2.0 * e.imag)
                layout.append(("pair", (mi, pi)))
    for k in tail_powers:
        cols.append(t ** (-float(k)))
        layout.append(("tail", k))
    return np.column_stack(cols), layout


def extract_residues(
    h: ObservationTrace,
    poles: list[PoleSet],
    n_modes_fit: int | None = None,
    t_min: float = 0.0,
    static: bool = True,
    tail_powers=(),
) -> ResidueData:
    r"""Residues of the Laplace-transformed trace at known poles.

    Fits, in the least-squares sense on ``t >= t_min``,

    .. math:: h(t) \approx R_0 + \sum_m 2\,\mathrm{Re}(R_m e^{p_m t})
              + \sum_k c_k t^{-k}

    where each conjugate pair contributes one complex unknown, real poles a
    real one, ``R_0`` accounts for the pole of ``psi_hat`` at ``s = 0`` and
    the optional power-law columns (exponents ``tail_powers``, requiring
    ``t_min > 0``) absorb branch-cut contributions of fractional models. The
    system is solved by an SVD-based least-squares routine.

    Returns
    -------
    ResidueData
        Per-mode data residues ``Res(h_hat; p)``, the fit residual and the
        2-norm condition number of the column-scaled fit matrix.
    """
    if n_modes_fit is None:
        n_modes_fit = len(poles)
    if n_modes_fit > len(poles):
        raise ShapeError("more modes requested than pole sets supplied")
    tail_powers = tuple(tail_powers)
    if tail_powers and not t_min > 0:
        raise DomainError("power-law tail columns need t_min > 0")
    reps = [_representatives(ps) for ps in poles[:n_modes_fit]]
    sel = h.t >= t_min
    t, y = h.t[sel], h.values[sel]
    mat, layout = _fit_matrix(t, reps, static, tail_powers)
    if t.size < 4 * mat.shape[1]:
        raise ShapeError(
            f"trace has {t.size} samples in the fit window, need >= {4 * mat.shape[1]}"
        )
    norms = np.linalg.norm(mat, axis=0)
    norms[norms == 0] = 1.0
    scaled = mat / norms
    coef, *_ = np.linalg.lstsq(scaled, y, rcond=None)
    coef = coef / norms
    sv = np.linalg.svd(scaled, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    resid = float(np.linalg.norm(mat @ coef - y))
    rel = resid / max(float(np.linalg.norm(y)), 1e-300)
    ill = cond > CONDITION_WARNING
    if ill:
        log.warning("residue fit is ill-conditioned (condition number %.2e)", cond)

    data = [np.zeros(len(r), dtype=complex) for r in reps]
    static_val = None
    tail = []
    i = 0
    for kind, key in layout:
        if kind == "static":
            static_val = float(coef[i])
            i += 1
        elif kind == "real":
            data[key[0]][key[1]] = coef[i]
            i += 1
        elif kind == "pair":
            data[key[0]][key[1]] = complex(coef[i], coef[i + 1])
            i += 2
        else:
            tail.append(coef[i])
            i += 1
    modes = [ModeResidues(m, reps[m], data[m]) for m in range(n_modes_fit)]
    return ResidueData(modes, static_val, np.array(tail), resid, rel, cond, ill, float(t_min))


# --------------------------------------------------------------------------
# coefficient recovery


@dataclass
class Recovery:
    """Recovered modal coefficients and the masked perturbation."""

    a: np.ndarray
    imag_relative: np.ndarray
    dkappa: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)


def recover_coefficients(
    res: ResidueData,
    exc: Excitation,
    model: DampingModel,
    basis: SpectralBasis,
    x0: float,
    c: float = 1.0,
    f_floor: float = 1e-3,
    psi_convention: str = "laplace",
) -> Recovery:
    """Modal coefficients ``a_m = <dkappa f^2, phi_m>`` and ``dkappa`` itself.

    For modes with several poles (overdamped real pairs) the per-pole
    estimates are combined by least squares. ``dkappa`` is
    ``synthesize(a) / f^2`` where ``|f| > f_floor * max|f|`` and NaN
    elsewhere.

    ``psi_convention`` selects ``psi_hat(p)`` from the time profile
    (``"laplace"``, the default) or the constant ``psi(0)`` (``"constant"``,
    which drops the ``1/s`` of the transform of a constant ``psi``; kept for
    comparison only).

    Raises
    ------
    AssumptionViolation
        If ``psi_hat(p_m)`` or ``phi_m(x0)`` is below ``1e-10`` in modulus.
    """
    n_fit = len(res.modes)
    phi0 = basis.eval_modes(x0)[:n_fit]
    bad = np.flatnonzero(np.abs(phi0) < HYPOTHESIS_THRESHOLD)
    if bad.size:
        raise AssumptionViolation(
            f"phi_m(x0) vanishes for modes {[int(m) for m in bad + 1]} at x0 = {x0}: the "
            "observation point must not be a node of the fitted eigenfunctions",
            hypothesis="phi_m(x0) != 0",
        )
    a = np.zeros(n_fit)
    imag_rel = np.zeros(n_fit)
    for m, mr in enumerate(res.modes):
        sym = Symbol(model, c, float(basis.lambdas[m]))
        denom = []
        for p in mr.poles:
            if psi_convention == "laplace":
                ph = complex(exc.chi.psi_hat(np.array([p.s]))[0])
            elif psi_convention == "constant":
                ph = complex(exc.chi.psi(np.array([0.0]))[0])
            else:
                raise DomainError(f"unknown psi convention {psi_convention!r}")
            if abs(ph) < HYPOTHESIS_THRESHOLD:
                raise AssumptionViolation(
                    f"psi_hat vanishes at pole {p.s} of mode {m + 1}",
                    hypothesis="psi_hat(p_m) != 0",
                )
            denom.append(residue(sym, p) * ph * phi0[m])
        d = np.array(denom)
        est = np.vdot(d, mr.data_residues) / np.vdot(d, d).real
        a[m] = est.real
        imag_rel[m] = abs(est.imag) / max(abs(est), 1e-300)

    coeffs = np.zeros(basis.n_modes)
    coeffs[:n_fit] = a
    g = synthesize(basis, coeffs)
    f = exc.f
    mask = np.abs(f) > f_floor * np.max(np.abs(f))
    dk = np.full_like(g, np.nan)
    dk[mask] = g[mask] / f[mask] ** 2
    return Recovery(a, imag_rel, dk, mask)


def masked_relative_error(rec: Recovery, truth, weights) -> float:
    """Relative ``L^2`` error of the recovered perturbation on its mask."""
    truth = np.asarray(truth, dtype=float)
    m = rec.mask
    num = np.sum(weights[m] * (rec.dkappa[m] - truth[m]) ** 2)
    den = np.sum(weights[m] * truth[m] ** 2)
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))


def report_dict(res: ResidueData, rec: Recovery, basis: SpectralBasis) -> dict:
    """JSON-serialisable summary of a linear inversion."""
    modes = []
    for mr in res.modes:
        modes.append({
            "mode": mr.mode + 1,
            "poles": [[p.s.real, p.s.imag] for p in mr.poles],
            "residues": [[r.real, r.imag] for r in mr.data_residues],
        })
    return {
        "modes": modes,
        "static_term": res.static,
        "fit_residual": res.fit_residual,
        "relative_fit_residual": res.relative_residual,
        "condition_number": res.condition,
        "ill_conditioned": res.ill_conditioned,
        "a": rec.a.tolist(),
        "imag_relative": rec.imag_relative.tolist(),
        "x": basis.x.tolist(),
        "dkappa": [None if np.isnan(v) else float(v) for v in rec.dkappa],
    }
