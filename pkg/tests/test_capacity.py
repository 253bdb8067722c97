import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mp_capacity, simpson_moment
from qperceptron import (ModelParams, boundary_offsets, capacity_curve, capacity_for,
                         classical_capacity, effective_threshold, solve_shift,
                         storage_capacity)
from qperceptron.capacity import order_parameter_residual, params_at
from qperceptron.errors import ConvergenceError, DomainError, InfeasibleBias, OverflowGuard

ALPHA_KT1 = 0.51957222960493796949  # 1 / I_2(-1), mpmath


class TestModelParams:
    @pytest.mark.parametrize("kwargs", [
        dict(m_in=1.0, m_out=0.0),
        dict(m_in=0.0, m_out=1.1),
        dict(m_in=0.0, m_out=0.0, kappa=-0.1),
        dict(m_in=0.0, m_out=0.0, sigma=-1.0),
        dict(m_in=0.0, m_out=0.0, epsilon=0.0),
        dict(m_in=0.0, m_out=0.0, epsilon=1.5),
        dict(m_in=math.nan, m_out=0.0),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            ModelParams(**kwargs)

    def test_replace(self):
        p = ModelParams(0.1, 0.2).replace(kappa=0.5)
        assert (p.m_in, p.m_out, p.kappa) == (0.1, 0.2, 0.5)


class TestEffectiveThreshold:
    def test_quantum_shift(self):
        kt = effective_threshold(ModelParams(0, 0, kappa=0.0, sigma=0.3, epsilon=0.01))
        assert kt == pytest.approx(0.69790436221225230444, abs=1e-12)

    def test_classical(self):
        assert effective_threshold(ModelParams(0, 0, kappa=0.7, sigma=0.0, epsilon=0.2)) == 0.7

    def test_half_epsilon(self):
        assert effective_threshold(ModelParams(0, 0, kappa=0.2, sigma=1.0, epsilon=0.5)) == 0.2


class TestBoundaryOffsets:
    def test_arithmetic(self):
        am, ap = boundary_offsets(1.0, 0.5, 0.6)
        assert am == pytest.approx(0.125, abs=1e-15)
        assert ap == pytest.approx(-1.375, abs=1e-15)

    def test_unbiased(self):
        assert boundary_offsets(123.0, 0.5, 0.0) == (-0.5, -0.5)

    def test_zero(self):
        assert boundary_offsets(0.0, 0.0, 0.9) == (0.0, 0.0)

    def test_rejects_unit_bias(self):
        with pytest.raises(DomainError):
            boundary_offsets(0.0, 0.0, 1.0)


class TestSolver:
    def test_unbiased_output_gives_zero(self):
        for kt in (0.0, 0.4, 2.0):
            sol = capacity_for(0.5, 0.0, kt)
            assert sol.M == 0.0

    def test_unique_root_matches_dense_scan(self):
        m_in, m_out, kt = 0.6, 0.6, 0.5
        sol = capacity_for(m_in, m_out, kt)
        s = math.sqrt(1 - m_in**2)
        grid = np.linspace(-10, 10, 20001)
        sign = np.array([order_parameter_residual(m_in * M / s, kt / s, m_out) for M in grid])
        changes = np.nonzero(np.diff(np.sign(sign)))[0]
        assert changes.size == 1
        assert grid[changes[0]] <= sol.M <= grid[changes[0] + 1]
        assert abs(sol.residual) <= 1e-12

    @pytest.mark.parametrize("args", [
        (0.0, 0.0, 1.0), (0.6, 0.6, 0.5), (0.3, 0.6, 0.0), (0.9, 0.95, 0.8),
        (-0.4, 0.7, 0.3), (0.2, -0.3, 1.5), (0.95, 0.99, 2.0),
    ])
    def test_against_mpmath_solver(self, args):
        M, alpha = mp_capacity(*args)
        sol = capacity_for(*args)
        assert sol.alpha_c == pytest.approx(alpha, rel=1e-11)
        assert sol.M == pytest.approx(M, rel=1e-9, abs=1e-12)

    def test_infeasible_bias(self):
        with pytest.raises(InfeasibleBias):
            storage_capacity(ModelParams(0.0, 0.3))

    def test_unbiased_limit_flag(self):
        sol = capacity_for(0.0, 0.3, 0.2, unbiased_limit=True)
        assert sol.M == math.inf
        near = capacity_for(1e-9, 0.3, 0.2)
        assert sol.alpha_c == pytest.approx(near.alpha_c, rel=1e-7)

    def test_unit_output_bias_overflows(self):
        with pytest.raises(OverflowGuard) as info:
            capacity_for(0.3, 1.0, 0.5)
        assert info.value.asymptote == math.inf

    def test_bracket_limit(self, monkeypatch):
        monkeypatch.setattr("qperceptron.capacity.SHIFT_LIMIT", 4.0)
        with pytest.raises(ConvergenceError):
            solve_shift(0.5, 0.999999, 0.5)

    def test_deep_output_bias_is_finite(self):
        sol = capacity_for(0.5, 1.0 - 1e-12, 0.3)
        assert math.isfinite(sol.alpha_c) and sol.alpha_c > 1e10
        assert sol.a_minus > 6


class TestCapacityValues:
    def test_unbiased_zero_threshold(self):
        sol = storage_capacity(ModelParams(0, 0))
        assert sol.alpha_c == pytest.approx(2.0, abs=1e-12)

    def test_threshold_one(self):
        sol = storage_capacity(ModelParams(0, 0, kappa=1.0))
        assert sol.alpha_c == pytest.approx(ALPHA_KT1, abs=1e-12)
        assert sol.alpha_c == pytest.approx(1 / simpson_moment(2, -1.0), abs=1e-10)

    def test_collapse_example(self):
        a = capacity_for(0.3, 0.6, 0.0).alpha_c
        b = capacity_for(0.0, 0.6, 0.0, unbiased_limit=True).alpha_c
        assert a == pytest.approx(b, abs=1e-9)

    def test_classical_examples(self):
        assert classical_capacity(0, 0, 0).alpha_c == pytest.approx(2.0, abs=1e-12)
        assert classical_capacity(0.5, 0, 0).alpha_c == pytest.approx(2.0, abs=1e-12)
        assert classical_capacity(0.4, 0.8, 0).alpha_c > 2.0

    def test_sigma_zero_is_classical_bitwise(self):
        for m_in, m_out, k in [(0.2, 0.4, 0.3), (0.7, -0.1, 1.2)]:
            q = storage_capacity(ModelParams(m_in, m_out, kappa=k, sigma=0.0, epsilon=0.1))
            c = classical_capacity(m_in, m_out, k)
            assert q.alpha_c == c.alpha_c and q.M == c.M

    def test_half_epsilon_is_classical(self):
        q = storage_capacity(ModelParams(0.3, 0.5, kappa=0.4, sigma=2.0, epsilon=0.5))
        assert q.alpha_c == classical_capacity(0.3, 0.5, 0.4).alpha_c

    def test_large_epsilon_warns(self):
        sol = storage_capacity(ModelParams(0.3, 0.5, kappa=0.4, sigma=0.2, epsilon=0.7))
        assert sol.warnings
        assert sol.kappa_tilde < 0.4


bias = st.floats(-0.95, 0.95).filter(lambda m: abs(m) > 1e-3)
threshold = st.floats(0.0, 2.5)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(bias, bias, threshold)
    def test_residual_small(self, m_in, m_out, kt):
        sol = capacity_for(m_in, m_out, kt)
        assert abs(sol.residual) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(bias, bias, threshold)
    def test_sign_symmetry(self, m_in, m_out, kt):
        base = capacity_for(m_in, m_out, kt)
        flipped_in = capacity_for(-m_in, m_out, kt)
        flipped_out = capacity_for(m_in, -m_out, kt)
        assert flipped_in.alpha_c == pytest.approx(base.alpha_c, rel=1e-11)
        assert flipped_out.alpha_c == pytest.approx(base.alpha_c, rel=1e-11)
        assert flipped_in.M == pytest.approx(-base.M, rel=1e-8, abs=1e-12)
        assert flipped_out.M == pytest.approx(-base.M, rel=1e-8, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(bias, bias, threshold, st.floats(0.01, 1.0))
    def test_decreasing_in_threshold(self, m_in, m_out, kt, dk):
        assert capacity_for(m_in, m_out, kt + dk).alpha_c < capacity_for(m_in, m_out, kt).alpha_c

    @settings(max_examples=100, deadline=None)
    @given(bias, st.floats(0.0, 0.95), st.floats(0.0, 0.95), threshold)
    def test_non_decreasing_in_output_bias(self, m_in, a, b, kt):
        lo, hi = sorted((a, b))
        assert capacity_for(m_in, hi, kt).alpha_c >= capacity_for(m_in, lo, kt).alpha_c - 1e-10

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 0.95), st.floats(0.0, 0.95), bias, st.floats(0.01, 2.5))
    def test_non_increasing_in_input_bias(self, a, b, m_out, kt):
        lo, hi = sorted((a, b))
        alpha_lo = capacity_for(lo, m_out, kt, unbiased_limit=True).alpha_c
        alpha_hi = capacity_for(hi, m_out, kt, unbiased_limit=True).alpha_c
        assert alpha_hi <= alpha_lo + 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.01, 0.95), bias)
    def test_zero_threshold_collapse(self, m_in, m_out):
        ref = capacity_for(0.0, m_out, 0.0, unbiased_limit=True).alpha_c
        assert capacity_for(m_in, m_out, 0.0).alpha_c == pytest.approx(ref, abs=1e-9)


class TestCurve:
    def test_collapse_sweep(self):
        template = ModelParams(0.0, 0.6, kappa=0.0)
        rows = capacity_curve(template, "m_in", [0.2, 0.4, 0.6])
        values = [r.alpha_c for r in rows]
        assert max(values) - min(values) <= 1e-9
        assert all(r.status == "ok" for r in rows)

    def test_single_row(self):
        rows = capacity_curve(ModelParams(0.0, 0.0), "m_out", [0.0])
        assert len(rows) == 1 and rows[0].alpha_c == pytest.approx(2.0, abs=1e-12)

    def test_infeasible_row(self):
        rows = capacity_curve(ModelParams(0.0, 0.0), "m_out", [0.5])
        assert rows[0].status == "infeasible-bias" and math.isnan(rows[0].alpha_c)

    def test_statuses(self):
        rows = capacity_curve(ModelParams(0.3, 0.0, kappa=0.2), "m_out", [0.2, 1.0, 1.5])
        assert [r.status for r in rows] == ["ok", "overflow", "invalid"]

    def test_input_bias_sweep_non_increasing(self):
        template = ModelParams(0.1, 0.6, kappa=0.0, sigma=0.1, epsilon=0.01)
        grid = np.linspace(0.1, 0.9, 9)
        alphas = [r.alpha_c for r in capacity_curve(template, "m_in", grid)]
        assert all(b <= a for a, b in zip(alphas, alphas[1:]))

    def test_joint_sweep_bounded(self):
        rows = capacity_curve(ModelParams(0.0, 0.0, kappa=0.5), "m",
                              [0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999])
        alphas = [r.alpha_c for r in rows]
        assert all(b > a for a, b in zip(alphas, alphas[1:]))
        assert alphas[-1] < 4.0 and alphas[-1] == pytest.approx(4.0, rel=0.02)

    def test_kappa_tilde_sweep(self):
        p = params_at(ModelParams(0.2, 0.3, kappa=0.1, sigma=0.4), "kappa_tilde", 0.9)
        assert (p.kappa, p.sigma) == (0.9, 0.0)

    def test_unknown_variable(self):
        with pytest.raises(DomainError):
            capacity_curve(ModelParams(0, 0), "temperature", [1.0])


def test_default_epsilon_matches_cli():
    # sigma > 0 without an explicit epsilon must still raise the threshold
    assert effective_threshold(ModelParams(0.0, 0.0, sigma=0.3)) == pytest.approx(
        0.69790436221225230444, rel=1e-14)
