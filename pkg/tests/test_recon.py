"""Noisy data, smoothing, hat basis, frozen Jacobian and the regularised Newton loop."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracwest.errors import BlowUpError, DomainError, ShapeError
from fracwest.forward import CWCH, ObservationTrace
from fracwest.fracops import TimeGrid
from fracwest.inversion import Excitation
from fracwest.recon import (
    ChapeauBasis,
    NewtonConfig,
    NoisyData,
    ReconstructionAborted,
    ReconstructionProblem,
    StopReason,
    assemble_jacobian,
    frozen_newton,
    make_noisy_data,
    rms,
    sample_times,
    smooth_trace,
    svd_analysis,
)
from fracwest.spectral import build_basis


@pytest.fixture(scope="module")
def small_problem():
    basis = build_basis("dn", 12)
    grid = TimeGrid(1.0, 256)
    exc = Excitation(np.sin(0.5 * np.pi * basis.x))
    return ReconstructionProblem(CWCH(0.1, 1.0, 1.0), basis, grid, exc, 1.0,
                                 sample_times(1.0, 30), chapeau=ChapeauBasis(10))


def smooth_signal():
    grid = TimeGrid(1.0, 1000)
    return ObservationTrace(1.0, grid, np.sin(2 * np.pi * grid.t) + grid.t)


class TestData:
    def test_rms(self):
        assert rms([3.0, -3.0]) == 3.0
        assert rms([]) == 0.0

    def test_sample_times(self):
        np.testing.assert_allclose(sample_times(2.0, 4), [0.5, 1.0, 1.5, 2.0])

    def test_validation(self):
        with pytest.raises(DomainError):
            NoisyData(np.arange(5.0), np.zeros(5))
        with pytest.raises(ShapeError):
            NoisyData(np.arange(12.0), np.zeros(11))
        with pytest.raises(DomainError):
            NoisyData(np.arange(12.0), np.zeros(12), noise_level=-1)

    @given(st.floats(0.0, 0.1), st.integers(0, 2**31))
    def test_noise_bounded_and_seeded(self, level, seed):
        tr = smooth_signal()
        a = make_noisy_data(tr, 40, level, seed)
        b = make_noisy_data(tr, 40, level, seed)
        clean = make_noisy_data(tr, 40, 0.0, seed).values
        np.testing.assert_array_equal(a.values, b.values)
        assert np.max(np.abs(a.values - clean)) <= level * np.max(np.abs(clean)) * (1 + 1e-12)
        assert a.noise_std() == pytest.approx(level * np.max(np.abs(a.values)) / np.sqrt(3))


class TestSmoothing:
    def test_noise_reduction_and_discrepancy(self):
        tr = smooth_signal()
        data = make_noisy_data(tr, 50, 0.01, seed=3)
        clean = make_noisy_data(tr, 50, 0.0).values
        out = smooth_trace(data, tr.grid)
        assert rms(out.at_samples - clean) < rms(data.values - clean)
        assert 0.8 * out.target <= out.misfit <= 1.2 * out.target
        assert out.trace.values.shape == tr.grid.t.shape

    def test_zero_noise_interpolates(self):
        tr = smooth_signal()
        data = make_noisy_data(tr, 50, 0.0)
        out = smooth_trace(data, tr.grid)
        np.testing.assert_allclose(out.at_samples, data.values, atol=1e-14)
        assert out.lam == 0.0

    def test_constant_data_warns(self, caplog):
        grid = TimeGrid(1.0, 100)
        data = NoisyData(sample_times(1.0, 20), np.ones(20))
        with caplog.at_level("WARNING"):
            smooth_trace(data, grid)
        assert "all samples are equal" in caplog.text


class TestChapeau:
    @given(st.integers(2, 50))
    def test_partition_of_unity(self, n):
        x = np.linspace(0, 1, 97)
        np.testing.assert_allclose(ChapeauBasis(n).matrix(x).sum(axis=1), 1.0, atol=1e-13)

    def test_linear_functions_reproduced(self):
        ch = ChapeauBasis(7)
        x = np.linspace(0, 1, 50)
        c = ch.interpolate(lambda s: 2 - 3 * s)
        np.testing.assert_allclose(ch.evaluate(c, x), 2 - 3 * x, atol=1e-13)

    def test_needs_two_nodes(self):
        with pytest.raises(DomainError):
            ChapeauBasis(1)


class TestJacobian:
    def test_matches_finite_differences(self, small_problem):
        J = assemble_jacobian(small_problem)
        assert J.shape == (30, 10)
        base = small_problem.forward(np.zeros(10))
        eps = 1e-4
        for k in (4, 9):
            e = np.zeros(10)
            e[k] = eps
            fd = (small_problem.forward(e) - base) / eps
            assert np.linalg.norm(fd - J[:, k]) <= 5e-3 * np.linalg.norm(J[:, k])

    def test_threads_do_not_change_result(self, small_problem):
        k0 = np.full(10, 0.05)
        j1 = assemble_jacobian(small_problem, kappa0=k0, jobs=1)
        j3 = assemble_jacobian(small_problem, kappa0=k0, jobs=3)
        np.testing.assert_array_equal(j1, j3)

    def test_column_route_agrees_near_zero(self, small_problem):
        batched = assemble_jacobian(small_problem)
        tiny = assemble_jacobian(small_problem, kappa0=np.full(10, 1e-9))
        np.testing.assert_allclose(tiny, batched, atol=1e-6 * np.max(np.abs(batched)))

    def test_shape_guard(self, small_problem):
        with pytest.raises(ShapeError):
            assemble_jacobian(small_problem, kappa0=np.zeros(3))


def linear_model(n=20, m=8, decay=0.5):
    rng = np.random.default_rng(7)
    U, _ = np.linalg.qr(rng.normal(size=(n, m)))
    V, _ = np.linalg.qr(rng.normal(size=(m, m)))
    return U @ np.diag(decay ** np.arange(m)) @ V.T


class TestFrozenNewton:
    def test_discrepancy_stops_at_first_index(self):
        A = linear_model()
        x = np.linspace(1, -1, 8)
        rng = np.random.default_rng(1)
        noise = 0.01 * rng.uniform(-1, 1, 20)
        delta = 0.01 / np.sqrt(3)
        st_ = frozen_newton(lambda k: A @ k, A, A @ x + noise, delta)
        assert st_.stop_reason is StopReason.DISCREPANCY
        assert st_.history[-1] <= st_.target
        assert all(h > st_.target for h in st_.history[:-1])
        assert all(np.diff(st_.history) <= 0)
        assert st_.iterations == len(st_.history) - 1 == len(st_.gammas)

    def test_exact_data_converges(self):
        A = linear_model(decay=0.8)
        x = np.linspace(1, -1, 8)
        st_ = frozen_newton(lambda k: A @ k, A, A @ x, 0.0, NewtonConfig(max_iter=200, gamma_decay=0.5))
        assert np.linalg.norm(st_.kappa_coeffs - x) <= 1e-6
        assert st_.stop_reason in (StopReason.STAGNATION, StopReason.MAX_ITER)

    def test_zero_data_zero_iterations(self):
        A = linear_model()
        st_ = frozen_newton(lambda k: A @ k, A, np.zeros(20), 0.0)
        assert st_.stop_reason is StopReason.DISCREPANCY
        assert st_.iterations == 0

    def test_gamma_schedule(self):
        A = linear_model()
        cfg = NewtonConfig(gamma0=1e-2, gamma_decay=0.5, max_iter=5)
        st_ = frozen_newton(lambda k: A @ k, A, A @ np.ones(8), 0.0, cfg)
        s1sq = np.linalg.svd(A, compute_uv=False)[0] ** 2
        np.testing.assert_allclose(st_.gammas, [1e-2 * 0.5**k * s1sq for k in range(len(st_.gammas))])

    def test_abort_carries_state(self):
        A = linear_model()

        def broken(k):
            if np.any(k):
                raise BlowUpError("degenerate")
            return A @ k

        with pytest.raises(ReconstructionAborted) as info:
            frozen_newton(broken, A, A @ np.ones(8), 0.0)
        assert info.value.state.iterations == 0
        assert len(info.value.state.history) == 1

    def test_data_shape(self):
        A = linear_model()
        with pytest.raises(ShapeError):
            frozen_newton(lambda k: A @ k, A, np.zeros(3), 0.0)

    def test_problem_round_trip_zero_truth(self, small_problem):
        J = assemble_jacobian(small_problem)
        data = small_problem.forward(np.zeros(10))
        st_ = frozen_newton(small_problem, J, data, 0.0)
        assert np.max(np.abs(st_.kappa_coeffs)) <= 1e-6


def test_svd_sorted(small_problem):
    res = svd_analysis(assemble_jacobian(small_problem))
    assert np.all(np.diff(res.sigma) <= 0)
    rows = res.rows()
    assert rows[0][0] == 1 and rows[0][2] == 1.0
