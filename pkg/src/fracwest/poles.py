r"""Poles and residues of the modal relaxation functions.

For an eigenvalue :math:`\lambda` of :math:`\mathcal{A}` the Laplace transform of
the modal response is :math:`\hat w = 1/\omega(\lambda, s)` with

.. math::

    \omega_{\mathrm{CWCH}}(s) = s^2 + b\lambda^\beta s^\alpha + c^2\lambda, \qquad
    \omega_{\mathrm{FZ}}(s) = b_2 s^{2+\alpha_2} + s^2 + b_1\lambda s^{\alpha_1} + c^2\lambda,

where all powers use the principal branch (cut along the negative real
axis). Poles are located by

1. approximating the exponents by fractions ``p/q`` and substituting
   ``s = z**q``, which turns ``omega`` into a polynomial in ``z``;
2. taking the roots of that polynomial (companion-matrix eigenvalues via
   :func:`numpy.roots`) and keeping those on the principal sheet
   ``arg z in (-pi/q, pi/q]``;
3. polishing ``s = z**q`` by Newton's method on ``omega`` with the true
   exponents;
4. certifying the count with the argument principle on a large rectangle
   that avoids the branch cut.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import CertificationError, DomainError, ModelError, MultipleRootError, NumericalError
from .forward import CWCH, FZ, DampingModel

__all__ = [
    "Symbol",
    "Pole",
    "PoleSet",
    "Sensitivity",
    "omega_eval",
    "omega_derivative",
    "find_poles",
    "argument_count",
    "residue",
    "residue_contour",
    "delta_sensitivity",
    "write_poles_csv",
]

log = logging.getLogger(__name__)

MAX_DENOMINATOR = 64
NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 50
CUT_OFFSET = 1e-6


@dataclass(frozen=True)
class Symbol:
    """Relaxation symbol ``omega(lam, .)`` of one mode."""

    model: DampingModel
    c: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"eigenvalue must be positive, got {self.lam}")
        self.model.validate(self.c)

    def terms(self) -> list[tuple[float, float]]:
        """``omega(s) = sum(coef * s**power)`` as ``(coef, power)`` pairs."""
        m, lam, c = self.model, self.lam, self.c
        if isinstance(m, CWCH):
            out = [(1.0, 2.0), (m.b * lam**m.beta, m.alpha), (c * c * lam, 0.0)]
        else:
            out = [
                (m.b2, 2.0 + m.alpha2),
                (1.0, 2.0),
                (m.b1 * lam, m.alpha1),
                (c * c * lam, 0.0),
            ]
        return [(coef, p) for coef, p in out if coef != 0.0]

    @property
    def integer_powers(self) -> bool:
        return all(float(p).is_integer() for _, p in self.terms())

    def scale(self, s) -> np.ndarray:
        """Magnitude used to judge ``|omega|``: ``max(|s|^2, c^2 lam)``."""
        return np.maximum(np.abs(s) ** 2, self.c * self.c * self.lam)


def _cpow(s: np.ndarray, p: float) -> np.ndarray:
    """Principal branch ``s**p`` with ``0**p = 0`` for ``p > 0``."""
    if p == 0.0:
        return np.ones_like(s)
    if float(p).is_integer():
        return s ** int(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(p * np.log(s))
    return np.where(s == 0, 0.0, out)


def omega_eval(sym: Symbol, s) -> np.ndarray | complex:
    """Evaluate the symbol at ``s`` (scalar or array) on the principal branch.

    At ``s = 0`` the fractional powers vanish, so the value is ``c^2 lam``
    by continuity.
    """
    arr = np.asarray(s, dtype=complex)
    out = np.zeros_like(arr)
    for coef, p in sym.terms():
        out = out + coef * _cpow(arr, p)
    return out if out.ndim else complex(out)


def omega_derivative(sym: Symbol, s) -> np.ndarray | complex:
    """``d omega / ds`` on the principal branch (``s != 0``)."""
    arr = np.asarray(s, dtype=complex)
    out = np.zeros_like(arr)
    for coef, p in sym.terms():
        if p != 0.0:
            out = out + coef * p * _cpow(arr, p - 1.0)
    return out if out.ndim else complex(out)


@dataclass
class Pole:
    """A root ``s`` of ``omega`` with the residue of ``1/omega`` there.

    ``converged`` is False when Newton's method did not reach the tolerance;
    ``newton_residual`` is ``|omega(s)|`` after polishing.
    """

    s: complex
    residue_w: complex
    multiplicity: int = 1
    newton_residual: float = 0.0
    converged: bool = True


@dataclass
class PoleSet:
    """All poles of one symbol plus the argument-principle counts.

    ``branch_count_certificate`` counts zeros in the closed left half of the
    certification box, ``rhp_count`` those to the right of it.
    """

    lam: float
    poles: list[Pole] = field(default_factory=list)
    branch_count_certificate: int = 0
    rhp_count: int = 0
    box_half_width: float = 0.0
    q: int = 1

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.poles], dtype=complex)

    def max_real_part(self) -> float:
        return float(np.max(self.s.real)) if self.poles else -math.inf


class Sensitivity(NamedTuple):
    dr_ddelta: float
    dtheta_ddelta: float
    r: float
    theta: float


# --------------------------------------------------------------------------
# lifting and root finding


def _rational_lift(powers: Iterable[float], rational_tol: float) -> tuple[int, list[int]]:
    """Smallest ``q <= 64`` with every power within ``rational_tol`` of ``k/q``."""
    powers = list(powers)
    for q in range(1, MAX_DENOMINATOR + 1):
        ks = [round(p * q) for p in powers]
        if all(abs(p - k / q) <= rational_tol for p, k in zip(powers, ks)):
            return q, ks
    raise DomainError(
        f"exponents {powers} have no common rational approximation with "
        f"denominator <= {MAX_DENOMINATOR} within {rational_tol}"
    )


def _newton(sym: Symbol, s0: complex) -> tuple[complex, float, bool]:
    s = complex(s0)
    best = (s, abs(omega_eval(sym, s)))
    for _ in range(NEWTON_MAX_ITER):
        val = omega_eval(sym, s)
        res = abs(val)
        if res < best[1]:
            best = (s, res)
        if res <= NEWTON_TOL * sym.scale(s):
            return s, res, True
        d = omega_derivative(sym, s)
        if d == 0 or not np.isfinite(d):
            break
        step = val / d
        s_new = s - step
        # stay on the principal sheet: never jump across the cut
        if s.imag != 0 and s_new.real < 0 and np.sign(s_new.imag) != np.sign(s.imag):
            s_new = complex(s_new.real, s.imag * 1e-3)
        s = s_new
    s, res = best
    return s, res, bool(res <= NEWTON_TOL * sym.scale(s))


def _candidate_roots(sym: Symbol, rational_tol: float) -> tuple[int, np.ndarray]:
    terms = sym.terms()
    q, ks = _rational_lift([p for _, p in terms], rational_tol)
    degree = max(ks)
    poly = np.zeros(degree + 1)
    for (coef, _), k in zip(terms, ks):
        poly[degree - k] += coef
    z = np.roots(poly)
    arg = np.angle(z)
    keep = (arg > -math.pi / q - 1e-12) & (arg <= math.pi / q + 1e-12)
    return q, z[keep] ** q


def find_poles(
    sym: Symbol, rational_tol: float = 1e-3, certify: bool = True
) -> PoleSet:
    """Locate all poles of ``1/omega`` and certify their number.

    Parameters
    ----------
    sym : Symbol
    rational_tol : float
        Accuracy of the rational approximation used for the seeds.
    certify : bool
        Run the argument-principle count and compare it with the number of
        poles found.

    Returns
    -------
    PoleSet
        Poles sorted by imaginary part, closed under conjugation.

    Raises
    ------
    CertificationError
        If the argument-principle count disagrees with the poles found.
    """
    q, seeds = _candidate_roots(sym, rational_tol)
    found: list[tuple[complex, float, bool]] = []
    for s0 in seeds:
        if s0.imag < -1e-9 * max(1.0, abs(s0)):
            continue  # recovered as the conjugate of an upper-half root
        s, res, ok = _newton(sym, s0)
        if abs(s.imag) <= 1e-12 * max(1.0, abs(s)):
            s = complex(s.real, 0.0)
        if s.imag < 0:
            s = s.conjugate()
        tol = 1e-8 * float(sym.scale(s))
        if any(abs(s - t) <= tol for t, _, _ in found):
            continue
        if not ok:
            log.warning("Newton did not converge for seed %s (|omega| = %.2e)", s0, res)
        found.append((s, res, ok))

    poles: list[Pole] = []
    for s, res, ok in found:
        members = [s] if s.imag == 0.0 else [s, s.conjugate()]
        for m in members:
            d = omega_derivative(sym, m)
            mult = 1 if abs(d) > 1e-12 * float(sym.scale(m)) else 2
            rw = 1.0 / d if mult == 1 else complex("nan")
            poles.append(Pole(m, rw, mult, float(res), ok))
    poles.sort(key=lambda p: (p.s.imag, p.s.real))
    out = PoleSet(lam=sym.lam, poles=poles, q=q)

    if certify:
        half = _box_half_width(sym, out)
        out.box_half_width = half
        total = sum(p.multiplicity for p in poles)
        out.branch_count_certificate = argument_count(sym, -half, CUT_OFFSET, half)
        out.rhp_count = argument_count(sym, CUT_OFFSET, half, half)
        if out.branch_count_certificate + out.rhp_count != total:
            raise CertificationError(
                f"lambda = {sym.lam:.6g}: argument principle counts "
                f"{out.branch_count_certificate} + {out.rhp_count} zeros, found {total} poles"
            )
    return out


def _box_half_width(sym: Symbol, ps: PoleSet) -> float:
    base = 10.0 * sym.c * math.sqrt(sym.lam) + 10.0
    if ps.poles:
        base = max(base, 2.0 * float(np.max(np.abs(ps.s))))
    return base


# --------------------------------------------------------------------------
# argument principle


def _phase_change(sym: Symbol, a: complex, b: complex, n0: int = 64) -> float:
    """Continuous change of ``arg omega`` along the segment ``a -> b``."""
    t = np.linspace(0.0, 1.0, n0 + 1)
    pts = a + (b - a) * t
    vals = omega_eval(sym, pts)
    total = 0.0
    stack = [(t[i], t[i + 1], vals[i], vals[i + 1]) for i in range(n0)]
    depth_guard = 0
    while stack:
        t0, t1, v0, v1 = stack.pop()
        if v0 == 0 or v1 == 0:
            raise NumericalError("contour passes through a zero of omega")
        d = np.angle(v1 / v0)
        if abs(d) > 0.25 and t1 - t0 > 1e-14:
            tm = 0.5 * (t0 + t1)
            vm = omega_eval(sym, a + (b - a) * tm)
            stack.append((t0, tm, v0, vm))
            stack.append((tm, t1, vm, v1))
            depth_guard += 1
            if depth_guard > 10**6:
                raise NumericalError("argument tracking did not resolve the contour")
            continue
        total += float(d)
    return total


def argument_count(sym: Symbol, x_left: float, x_right: float, half_height: float) -> int:
    """Number of zeros of ``omega`` inside ``[x_left, x_right] x [-h, h]``.

    When the box reaches the negative real axis and ``omega`` has fractional
    powers, the cut is excluded by a slot of half-width ``CUT_OFFSET / 2``
    ending at ``Re s = CUT_OFFSET / 2``; the box must then satisfy
    ``x_right > CUT_OFFSET / 2``.
    """
    h = float(half_height)
    eta = 0.5 * CUT_OFFSET
    slot = x_left < 0 and not sym.integer_powers
    if slot:
        path = [
            complex(x_right, -h),
            complex(x_right, h),
            complex(x_left, h),
            complex(x_left, eta),
            complex(eta, eta),
            complex(eta, -eta),
            complex(x_left, -eta),
            complex(x_left, -h),
            complex(x_right, -h),
        ]
    else:
        path = [
            complex(x_right, -h),
            complex(x_right, h),
            complex(x_left, h),
            complex(x_left, -h),
            complex(x_right, -h),
        ]
    total = sum(_phase_change(sym, a, b) for a, b in zip(path[:-1], path[1:]))
    count = total / (2.0 * math.pi)
    n = int(round(count))
    if abs(count - n) > 0.1:
        raise CertificationError(f"argument principle did not return an integer ({count:.4f})")
    return n


# --------------------------------------------------------------------------
# residues and sensitivity


def residue(sym: Symbol, p: Pole | complex) -> complex:
    """Residue of ``1/omega`` at a simple pole, ``1/omega'(p)``.

    Raises
    ------
    MultipleRootError
        If ``|omega'(p)| <= 1e-12 * max(|p|^2, c^2 lam)``.
    """
    s = p.s if isinstance(p, Pole) else complex(p)
    d = omega_derivative(sym, s)
    if abs(d) <= 1e-12 * float(sym.scale(s)):
        raise MultipleRootError(f"pole {s} is not simple (|omega'| = {abs(d):.3e})")
    return 1.0 / d


def residue_contour(sym: Symbol, p: Pole | complex, radius_rel: float = 1e-3, n_nodes: int = 64) -> complex:
    """Residue of ``1/omega`` by the trapezoidal rule on a small circle."""
    s = p.s if isinstance(p, Pole) else complex(p)
    rad = radius_rel * abs(s)
    e = np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    vals = 1.0 / omega_eval(sym, s + rad * e)
    return complex(rad * np.mean(vals * e))


def delta_sensitivity(sym: Symbol, pole: Pole | complex | None = None) -> Sensitivity:
    r"""Derivatives of the polar coordinates of an FZ pole with respect to ``delta``.

    ``delta = b1 - c^2 b2`` is varied with ``b2`` held fixed. Writing the
    real and imaginary parts of ``omega(r e^{i theta})`` as ``f(r, theta)``,
    the implicit function theorem gives

    .. math::

        \frac{\partial r}{\partial\delta} = \frac{B_1C_2 - B_2C_1}{A_1B_2 - A_2B_1},\qquad
        \frac{\partial\theta}{\partial\delta} = \frac{C_1A_2 - C_2A_1}{A_1B_2 - A_2B_1},

    with ``A = d f / d r``, ``B_1 = -r A_2``, ``B_2 = r A_1`` and
    ``C = lam r^alpha1 (cos, sin)(alpha1 theta)``.

    ``pole`` defaults to the undamped root ``i c sqrt(lam)``, which is a root
    when ``delta = 0``.
    """
    m = sym.model
    if not isinstance(m, FZ):
        raise ModelError("delta sensitivity is defined for the FZ model only")
    if pole is None:
        s = 1j * sym.c * math.sqrt(sym.lam)
    else:
        s = pole.s if isinstance(pole, Pole) else complex(pole)
    r, th = abs(s), math.atan2(s.imag, s.real)
    lam, b1, b2, a1, a2 = sym.lam, m.b1, m.b2, m.alpha1, m.alpha2
    A1 = (
        (2 + a2) * b2 * r ** (1 + a2) * math.cos((2 + a2) * th)
        + 2 * r * math.cos(2 * th)
        + a1 * b1 * lam * r ** (a1 - 1) * math.cos(a1 * th)
    )
    A2 = (
        (2 + a2) * b2 * r ** (1 + a2) * math.sin((2 + a2) * th)
        + 2 * r * math.sin(2 * th)
        + a1 * b1 * lam * r ** (a1 - 1) * math.sin(a1 * th)
    )
    B1, B2 = -r * A2, r * A1
    C1 = lam * r**a1 * math.cos(a1 * th)
    C2 = lam * r**a1 * math.sin(a1 * th)
    det = A1 * B2 - A2 * B1
    if det == 0.0:
        raise NumericalError("degenerate Jacobian in delta sensitivity (A1 = A2 = 0)")
    return Sensitivity((B1 * C2 - B2 * C1) / det, (C1 * A2 - C2 * A1) / det, r, th)


def write_poles_csv(pole_sets: Iterable[PoleSet], stream, header_comment: str | None = None) -> None:
    """One row per pole: lambda, Re s, Im s, Re residue, Im residue, residual."""
    if header_comment:
        stream.write(f"# {header_comment}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["lambda", "re_s", "im_s", "re_residue", "im_residue", "newton_residual",
                "certificate", "rhp_count"])
    for ps in pole_sets:
        for p in ps.poles:
            w.writerow([
                f"{ps.lam:.17g}", f"{p.s.real:.17g}", f"{p.s.imag:.17g}",
                f"{p.residue_w.real:.17g}", f"{p.residue_w.imag:.17g}",
                f"{p.newton_residual:.17g}", ps.branch_count_certificate, ps.rhp_count,
            ])
