"""Discrete Abel integral, L1 Caputo derivative and the coercivity check."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import cumulative_trapezoid

from fracwest.errors import DomainError, ShapeError
from fracwest.fracops import (
    Series,
    TimeGrid,
    abel_integral,
    abel_weights,
    caputo_derivative,
    l1_weights,
    verify_alikhanov,
)

ORDERS = st.floats(min_value=0.05, max_value=0.95)


def grunwald(values: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    """Grünwald-Letnikov derivative of samples that vanish at t = 0."""
    n = values.size
    w = np.empty(n)
    w[0] = 1.0
    for k in range(1, n):
        w[k] = w[k - 1] * (1.0 - (alpha + 1.0) / k)
    return np.array([np.dot(w[: k + 1], values[k::-1]) for k in range(n)]) / dt**alpha


def caputo_of_interpolant(t: np.ndarray, v: np.ndarray, alpha: float) -> np.ndarray:
    """Exact Caputo derivative of the piecewise-linear interpolant, cell by cell."""
    slopes = np.diff(v) / np.diff(t)
    out = np.zeros_like(t)
    for k in range(1, t.size):
        left = (t[k] - t[:k]) ** (1 - alpha)
        right = (t[k] - t[1 : k + 1]) ** (1 - alpha)
        out[k] = np.sum(slopes[:k] * (left - right)) / math.gamma(2 - alpha)
    return out


class TestGrid:
    def test_nodes_and_step(self):
        g = TimeGrid(2.0, 8)
        assert g.dt == pytest.approx(0.25)
        assert len(g) == 9
        assert g.t[-1] == pytest.approx(2.0)

    @pytest.mark.parametrize("t_final, n", [(1.0, 1), (0.0, 10), (-1.0, 10), (math.inf, 10), (1.0, 2.5)])
    def test_rejects_bad_grids(self, t_final, n):
        with pytest.raises(DomainError):
            TimeGrid(t_final, n)

    def test_series_shape_and_finiteness(self):
        g = TimeGrid(1.0, 4)
        with pytest.raises(ShapeError):
            Series(g, np.zeros(4))
        with pytest.raises(DomainError):
            Series(g, np.array([0, 1, np.nan, 0, 0]))


class TestAbel:
    @pytest.mark.parametrize("gamma", [0.1, 0.5, 0.75, 1.0])
    def test_exact_on_linear_and_constant(self, gamma):
        g = TimeGrid(1.5, 64)
        t = g.t
        lin = abel_integral(Series(g, t), gamma).values
        const = abel_integral(Series(g, np.ones_like(t)), gamma).values
        np.testing.assert_allclose(lin, t ** (1 + gamma) / math.gamma(2 + gamma), atol=1e-12)
        np.testing.assert_allclose(const, t**gamma / math.gamma(1 + gamma), atol=1e-12)

    def test_order_one_is_trapezoid(self, rng):
        g = TimeGrid(1.0, 50)
        v = rng.normal(size=51)
        np.testing.assert_allclose(
            abel_integral(Series(g, v), 1.0).values,
            cumulative_trapezoid(v, g.t, initial=0.0),
            atol=1e-13,
        )

    def test_second_order_on_smooth_data(self):
        gamma = 0.5
        exact = None
        errs = []
        for n in (64, 128, 256):
            g = TimeGrid(1.0, n)
            approx = abel_integral(Series.from_function(g, lambda t: t**2), gamma).values[-1]
            exact = 2.0 / math.gamma(3 + gamma)
            errs.append(abs(approx - exact))
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        assert all(3.5 < r < 4.5 for r in ratios)

    def test_weights_sum_to_kernel_integral(self):
        gamma = 0.3
        near, far = abel_weights(gamma, 20)
        # integral of (k - s)^(gamma-1) over [0, k] in units of dt, times gamma
        k = 20
        assert (near[1 : k + 1].sum() + far[1 : k + 1].sum()) == pytest.approx(k**gamma / gamma)

    @pytest.mark.parametrize("gamma", [0.0, -0.5, 1.5])
    def test_rejects_bad_order(self, gamma):
        with pytest.raises(DomainError):
            abel_integral(Series(TimeGrid(1.0, 4), np.zeros(5)), gamma)

    @given(ORDERS, st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, gamma, a, b):
        g = TimeGrid(1.0, 32)
        v, w = np.sin(3 * g.t), g.t**3
        lhs = abel_integral(Series(g, a * v + b * w), gamma).values
        rhs = a * abel_integral(Series(g, v), gamma).values + b * abel_integral(Series(g, w), gamma).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestCaputo:
    def test_exact_on_linear(self):
        g = TimeGrid(1.0, 512)
        d = caputo_derivative(Series(g, g.t), 0.5).values
        np.testing.assert_allclose(d, g.t**0.5 / math.gamma(1.5), atol=1e-10, rtol=0)

    def test_constants_map_to_zero(self):
        g = TimeGrid(1.0, 16)
        assert np.all(caputo_derivative(Series(g, np.full(17, 3.0)), 0.4).values == 0.0)

    def test_matches_grunwald_on_square(self):
        g = TimeGrid(1.0, 512)
        v = g.t**2
        l1 = caputo_derivative(Series(g, v), 0.5).values
        gl = grunwald(v, 0.5, g.dt)
        exact = 2 * g.t**1.5 / math.gamma(2.5)
        assert np.max(np.abs(l1 - gl)) <= 2e-3
        assert np.max(np.abs(l1 - exact)) < np.max(np.abs(gl - exact))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.2])
    def test_rejects_bad_order(self, alpha):
        with pytest.raises(DomainError):
            caputo_derivative(Series(TimeGrid(1.0, 4), np.zeros(5)), alpha)

    def test_l1_weights(self):
        scale, b = l1_weights(0.5, 4)
        assert scale == pytest.approx(1 / math.gamma(1.5))
        np.testing.assert_allclose(b, [1, math.sqrt(2) - 1, math.sqrt(3) - math.sqrt(2), 2 - math.sqrt(3)])

    @given(ORDERS, st.lists(st.floats(-5, 5), min_size=11, max_size=11))
    def test_exact_on_piecewise_linear(self, alpha, vals):
        g = TimeGrid(2.0, 10)
        v = np.array(vals)
        got = caputo_derivative(Series(g, v), alpha).values
        np.testing.assert_allclose(got, caputo_of_interpolant(g.t, v, alpha), atol=1e-9)


class TestAlikhanov:
    @given(ORDERS, st.lists(st.floats(-10, 10), min_size=21, max_size=21))
    def test_holds_on_piecewise_linear(self, alpha, vals):
        g = TimeGrid(1.0, 20)
        chk = verify_alikhanov(Series(g, np.array(vals)), alpha)
        assert chk.holds
        assert chk.lhs >= 0

    def test_lhs_equals_fine_quadrature(self):
        g = TimeGrid(1.0, 8)
        v = np.array([0, 1, 0.5, 2, 1.5, -1, 0, 0.3, 1.0])
        alpha = 0.6
        chk = verify_alikhanov(Series(g, v), alpha)
        # refine each cell 64 times: the interpolant is unchanged
        fine = TimeGrid(1.0, 8 * 64)
        vf = np.interp(fine.t, g.t, v)
        d = caputo_of_interpolant(fine.t, vf, alpha)
        slopes = np.repeat(np.diff(v) / g.dt, 64)
        # midpoint of the derivative per fine cell (trapezoid of the nodal values)
        approx = np.sum(0.5 * (d[1:] + d[:-1]) * slopes) * fine.dt
        assert chk.lhs == pytest.approx(approx, rel=2e-2)
