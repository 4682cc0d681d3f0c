"""Separable excitation, residue extraction and modal coefficient recovery."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fracwest.errors import AssumptionViolation, DomainError, ModelError, ShapeError, SpecificationError
from fracwest.forward import CWCH, FZ, ObservationTrace, solve_linearized, solve_westervelt
from fracwest.fracops import TimeGrid
from fracwest.inversion import (
    CustomProfile,
    Excitation,
    LinearProfile,
    build_excitation_source,
    extract_residues,
    forcing_coefficients,
    laplace_trace,
    masked_relative_error,
    mode_poles,
    recover_coefficients,
    report_dict,
    synthesize_trace,
)
from fracwest.poles import Symbol, find_poles
from fracwest.spectral import build_basis


def quadratic_profile(**kw):
    return CustomProfile(
        chi=lambda t: t**2, dchi=lambda t: 2 * t, ddchi=lambda t: 2 + 0 * t,
        psi_fn=lambda t: 12 * t**2, **kw,
    )


class TestProfiles:
    def test_linear_profile(self):
        p = LinearProfile()
        t = np.array([0.0, 0.5, 2.0])
        np.testing.assert_array_equal(p.value(t), t)
        np.testing.assert_array_equal(p.d2(t), 0.0)
        np.testing.assert_allclose(p.caputo(t, 0.5), t**0.5 / math.gamma(1.5))
        np.testing.assert_array_equal(p.caputo(t, 1.0), 1.0)
        np.testing.assert_array_equal(p.psi(t), 2.0)
        assert complex(p.psi_hat(np.array([1 + 1j]))[0]) == pytest.approx(2 / (1 + 1j))

    def test_custom_profile_missing_pieces(self):
        p = quadratic_profile()
        t = np.linspace(0, 1, 5)
        np.testing.assert_array_equal(p.caputo(t, 1.0), 2 * t)
        with pytest.raises(SpecificationError):
            p.caputo(t, 0.5)
        with pytest.raises(SpecificationError):
            p.psi_hat(np.array([1.0]))
        with pytest.raises(SpecificationError):
            p.caputo_of_d2(t, 0.5)


class TestExcitation:
    def test_rejects_profile_with_many_zeros(self):
        with pytest.raises(DomainError):
            Excitation(np.array([0.0, 0.0, 0.0, 1.0]))

    def test_unresolved_profile(self):
        basis = build_basis("dd", 8)
        with pytest.raises(ModelError):
            build_excitation_source(Excitation(np.ones_like(basis.x)), CWCH(0.1, 1, 1),
                                    basis, TimeGrid(1.0, 16))

    def test_fz_needs_flat_start(self):
        basis = build_basis("dd", 8)
        exc = Excitation(np.sin(np.pi * basis.x), quadratic_profile())
        with pytest.raises(ModelError):
            build_excitation_source(exc, FZ(0.2, 0.1, 1.0, 1.0), basis, TimeGrid(1.0, 16))

    def test_forcing_coefficients_use_square_of_profile(self):
        basis = build_basis("dd", 8)
        f = np.sin(np.pi * basis.x)
        a = forcing_coefficients(np.ones_like(basis.x), Excitation(f), basis)
        # <sin^2(pi x), sqrt2 sin(j pi x)> vanishes for even j
        assert np.max(np.abs(a[1::2])) < 1e-12
        assert a[0] == pytest.approx(4 * math.sqrt(2) / (3 * math.pi), rel=1e-4)


class TestSynthesis:
    def test_two_routes_agree(self):
        basis = build_basis("dd", 8)
        grid = TimeGrid(2.0, 1024)
        model = CWCH(0.1, 1.0, 0.5)
        exc = Excitation(np.sin(np.pi * basis.x))
        dk = 0.1 * basis.x * (1 - basis.x)
        x0 = 0.3
        direct = synthesize_trace(dk, exc, model, basis, grid, x0)
        src = build_excitation_source(exc, model, basis, grid)
        u0 = solve_westervelt(np.zeros_like(basis.x), src.r, model, basis, grid, init=src.init)
        z = solve_linearized(np.zeros_like(basis.x), u0, dk, model, basis, grid)
        via_state = z.u @ basis.eval_modes(x0)
        assert np.max(np.abs(direct.values - via_state)) <= 1e-6 * np.max(np.abs(direct.values))

    def test_laplace_of_exponential(self):
        grid = TimeGrid(40.0, 40000)
        h = ObservationTrace(0.5, grid, np.exp(-grid.t))
        lv = laplace_trace(h, 1.0 + 0.5j)
        assert lv.value == pytest.approx(1 / (2.0 + 0.5j), rel=1e-6)
        assert lv.truncation_bound < 1e-15
        assert math.isinf(laplace_trace(h, -0.1).truncation_bound)


class TestResidueFit:
    def _trace(self, model, c, lam_modes, weights, grid, static=0.0):
        basis = build_basis("dd", len(lam_modes))
        pole_sets = [find_poles(Symbol(model, c, lam)) for lam in lam_modes]
        y = np.full(grid.t.size, static)
        for ps, w in zip(pole_sets, weights):
            for p in ps.poles:
                y = y + (w * np.exp(p.s * grid.t)).real if p.s.imag == 0 else y
            up = [p for p in ps.poles if p.s.imag > 0]
            for p in up:
                y = y + 2 * (w * np.exp(p.s * grid.t)).real
        return basis, pole_sets, ObservationTrace(0.3, grid, y)

    def test_exact_exponential_sum(self):
        grid = TimeGrid(5.0, 2000)
        model = CWCH(0.1, 1.0, 1.0)
        lams = [(np.pi * j) ** 2 for j in (1, 2, 3)]
        weights = [0.3 - 0.2j, -0.1 + 0.05j, 0.02j]
        _, ps, tr = self._trace(model, 1.0, lams, weights, grid, static=0.7)
        res = extract_residues(tr, ps)
        assert res.static == pytest.approx(0.7, abs=1e-10)
        for mr, w in zip(res.modes, weights):
            assert mr.data_residues[0] == pytest.approx(w, abs=1e-10)
        assert res.relative_residual < 1e-12
        assert res.condition >= 1.0 and not res.ill_conditioned

    def test_guards(self):
        grid = TimeGrid(1.0, 16)
        model = CWCH(0.1, 1.0, 1.0)
        _, ps, tr = self._trace(model, 1.0, [np.pi**2] * 3, [1, 1, 1], grid)
        with pytest.raises(ShapeError):
            extract_residues(tr, ps)
        with pytest.raises(ShapeError):
            extract_residues(tr, ps[:1], n_modes_fit=2)
        with pytest.raises(DomainError):
            extract_residues(tr, ps[:1], tail_powers=(1,))


def _round_trip(truth_scale=0.1, x0=0.3, psi_convention="laplace"):
    basis = build_basis("dd", 8)
    grid = TimeGrid(5.0, 4096)
    model = CWCH(0.1, 1.0, 1.0)
    exc = Excitation(np.sin(np.pi * basis.x))
    truth = truth_scale * basis.x * (1 - basis.x)
    tr = synthesize_trace(truth, exc, model, basis, grid, x0)
    res = extract_residues(tr, mode_poles(model, basis, 4), 4)
    rec = recover_coefficients(res, exc, model, basis, x0, f_floor=0.3, psi_convention=psi_convention)
    return basis, exc, truth, res, rec


class TestRecovery:
    def test_round_trip(self):
        basis, exc, truth, res, rec = _round_trip()
        assert masked_relative_error(rec, truth, basis.weights) <= 5e-2
        np.testing.assert_allclose(rec.a, forcing_coefficients(truth, exc, basis)[:4], atol=2e-4)
        # odd modes carry the signal; the even ones vanish by symmetry
        assert np.max(rec.imag_relative[[0, 2]]) < 1e-2
        assert not np.any(rec.mask[[0, -1]])
        assert np.all(np.isnan(rec.dkappa[~rec.mask]))

    def test_zero_perturbation(self):
        basis, _, truth, _, rec = _round_trip(truth_scale=0.0)
        np.testing.assert_allclose(rec.a, 0.0, atol=1e-14)
        assert masked_relative_error(rec, truth, basis.weights) < 1e-12

    def test_observation_at_node(self):
        with pytest.raises(AssumptionViolation) as info:
            _round_trip(x0=0.0)
        assert info.value.hypothesis == "phi_m(x0) != 0"

    def test_vanishing_transform(self):
        basis = build_basis("dd", 4)
        grid = TimeGrid(2.0, 512)
        model = CWCH(0.1, 1.0, 1.0)
        exc = Excitation(np.sin(np.pi * basis.x))
        tr = synthesize_trace(0.1 * basis.x, exc, model, basis, grid, 0.3)
        res = extract_residues(tr, mode_poles(model, basis, 2), 2)
        bad = Excitation(exc.f, quadratic_profile(psi_hat_fn=lambda s: 0 * s))
        with pytest.raises(AssumptionViolation) as info:
            recover_coefficients(res, bad, model, basis, 0.3)
        assert info.value.hypothesis == "psi_hat(p_m) != 0"

    def test_convention_switch(self):
        *_, lap = _round_trip()
        basis, exc, truth, res, const = _round_trip(psi_convention="constant")
        assert masked_relative_error(const, truth, basis.weights) > 0.5
        with pytest.raises(DomainError):
            recover_coefficients(res, exc, CWCH(0.1, 1.0, 1.0), basis, 0.3, psi_convention="bogus")

    def test_report_is_json_ready(self):
        import json

        basis, _, _, res, rec = _round_trip()
        doc = report_dict(res, rec, basis)
        text = json.dumps(doc)
        assert '"condition_number"' in text and len(doc["modes"]) == 4
