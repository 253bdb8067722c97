import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import angle_grid_margin, cone_feasible, simpson_cdf
from qperceptron.errors import DomainError
from qperceptron.mathkernel import std_normal_cdf_inv
from qperceptron.perceptron import (Instance, Outcome, classification_probability,
                                    classify_outcome, classify_outcomes, is_storable, margin,
                                    max_margin, quantum_storage_ok, sample_homodyne,
                                    sample_instance)
from qperceptron.rng import stream


def make(patterns, targets):
    return Instance(np.array(patterns), np.array(targets), 0.0, 0.0, 0)


class TestInstance:
    def test_degenerate_biases(self):
        inst = sample_instance(7, 9, 1.0, -1.0, seed=3)
        assert np.all(inst.patterns == 1)
        assert np.all(inst.targets == -1)

    def test_unbiased_mean(self):
        inst = sample_instance(1000, 1000, 0.0, 0.0, seed=11)
        assert abs(inst.patterns.mean()) <= 4 / math.sqrt(1e6)

    def test_biased_mean(self):
        inst = sample_instance(500, 400, 0.6, -0.2, seed=5)
        assert inst.patterns.mean() == pytest.approx(0.6, abs=4 * 0.8 / math.sqrt(2e5))

    def test_deterministic_and_prefix(self):
        a = sample_instance(20, 30, 0.3, 0.1, seed=4)
        b = sample_instance(20, 30, 0.3, 0.1, seed=4)
        c = sample_instance(20, 12, 0.3, 0.1, seed=4)
        assert np.array_equal(a.patterns, b.patterns)
        assert np.array_equal(a.head(12).patterns, c.patterns)
        assert np.array_equal(a.head(12).targets, c.targets)

    def test_json_round_trip(self):
        inst = sample_instance(6, 4, 0.2, 0.5, seed=9)
        for explicit in (True, False):
            back = Instance.from_json(inst.to_json(explicit=explicit))
            assert np.array_equal(back.patterns, inst.patterns)
            assert np.array_equal(back.targets, inst.targets)

    def test_validation(self):
        with pytest.raises(DomainError):
            make([[1, 0]], [1])
        with pytest.raises(DomainError):
            make([[1, 1]], [1, 1])
        with pytest.raises(DomainError):
            sample_instance(3, 3, 1.5, 0.0, seed=0)

    def test_read_only(self):
        inst = sample_instance(3, 3, 0.0, 0.0, seed=0)
        with pytest.raises(ValueError):
            inst.patterns[0, 0] = 1


class TestClassification:
    def test_half(self):
        assert classification_probability([1.0, -1.0], [1.0, 1.0], 1, 0.0, 0.7) == 0.5

    def test_phi_one(self):
        w, x, sigma = np.array([3.0, 4.0]), np.array([1.0, 1.0]), 1.4
        value = classification_probability(w, x, 1, 0.0, sigma)
        assert value == pytest.approx(simpson_cdf(1.0), abs=1e-13)

    def test_sharp_limit(self):
        w = np.array([1.0, 0.0])
        x = np.array([0.6, 5.0])
        assert classification_probability(w, x, 1, 0.5, 1e-6) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0.01, 100))
    def test_scale_invariance(self, c):
        w, x = np.array([0.3, -1.2, 0.8]), np.array([1.0, -1.0, 1.0])
        a = classification_probability(w, x, -1, 0.2, 0.6)
        assert classification_probability(c * w, x, -1, 0.2, 0.6) == pytest.approx(a, abs=1e-14)

    def test_sigma_must_be_positive(self):
        with pytest.raises(DomainError):
            classification_probability([1.0], [1.0], 1, 0.0, 0.0)

    def test_outcome_rules(self):
        assert classify_outcome(0.3, 1.0, 0.5) is Outcome.UNCLASSIFIED
        assert classify_outcome(-0.6, 1.0, 0.5) is Outcome.MINUS
        assert classify_outcome(0.5, 1.0, 0.5) is Outcome.PLUS
        assert classify_outcome(-0.5, 1.0, 0.5) is Outcome.MINUS

    def test_vectorised_matches_scalar(self):
        s = stream(1).normal(0, 1, 500)
        codes = classify_outcomes(s, 1.3, 0.4)
        assert [c for c in codes] == [classify_outcome(v, 1.3, 0.4).value for v in s]


class TestHomodyne:
    def test_moments(self):
        w, x, sigma = np.array([1.0, 1.0]), np.array([1.0, 1.0]), 0.5
        s = sample_homodyne(w, x, sigma, seed=2, size=100000)
        sd = math.sqrt(2) * sigma
        assert abs(s.mean() - 2.0) <= 5 * sd / math.sqrt(1e5)
        assert s.var() == pytest.approx(0.5, rel=0.1)

    def test_tiny_sigma(self):
        s = sample_homodyne([1.0, 2.0], [1.0, -1.0], 1e-12, seed=0)
        assert s == pytest.approx(-1.0, abs=1e-10)

    @pytest.mark.parametrize("case", range(5))
    def test_frequency_matches_probability(self, case):
        rng = stream(77, case)
        N = 4
        w = rng.normal(size=N)
        x = rng.choice([-1.0, 1.0], size=N)
        xi = int(rng.choice([-1, 1]))
        kappa, sigma = float(rng.uniform(0, 0.5)), float(rng.uniform(0.2, 1.5))
        n = 100000
        codes = classify_outcomes(sample_homodyne(w, x, sigma, seed=case, size=n),
                                  np.linalg.norm(w), kappa)
        freq = np.mean(codes == xi)
        R = classification_probability(w, x, xi, kappa, sigma)
        assert abs(freq - R) <= 4 * math.sqrt(R * (1 - R) / n) + 1e-12


class TestMargin:
    def test_single_pattern(self):
        inst = make([[1, -1, 1, 1]], [-1])
        w = inst.signed_patterns()[0]
        assert margin(w, inst) == pytest.approx(2.0, abs=1e-15)

    def test_orthogonal(self):
        inst = make([[1, 1], [-1, -1]], [1, 1])
        assert margin([1.0, -1.0], inst) == 0.0

    def test_two_patterns(self):
        inst = make([[1, 1], [1, -1]], [1, 1])
        assert margin([1.0, 0.0], inst) == 1.0
        assert angle_grid_margin(inst.signed_patterns()) == pytest.approx(1.0, abs=1e-9)

    def test_zero_weight_rejected(self):
        with pytest.raises(DomainError):
            margin([0.0, 0.0], make([[1, 1]], [1]))


class TestQuantumStorage:
    def test_reduction_law(self):
        rng = stream(123)
        agree = 0
        for _ in range(2000):
            N, p = int(rng.integers(2, 9)), int(rng.integers(1, 9))
            inst = sample_instance(N, p, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                   int(rng.integers(0, 2**31)))
            w = rng.normal(size=N)
            kappa, sigma = rng.uniform(0, 1), rng.uniform(0.01, 1.0)
            eps = rng.uniform(0.001, 0.999)
            kt = kappa + sigma * std_normal_cdf_inv(1 - eps)
            agree += quantum_storage_ok(w, inst, kappa, sigma, eps) == (margin(w, inst) >= kt)
        assert agree == 2000

    def test_half_epsilon_zero_kappa(self):
        inst = make([[1, 1], [1, -1]], [1, -1])
        assert quantum_storage_ok([0.0, 1.0], inst, 0.0, 0.8, 0.5)
        assert not quantum_storage_ok([1.0, 0.0], inst, 0.0, 0.8, 0.5)

    def test_single_pattern_stored(self):
        inst = make([[1, 1, -1]], [1])
        w = inst.signed_patterns()[0]
        assert quantum_storage_ok(w, inst, 1.0, 0.3, 0.05)  # kt ~ 1.49 < sqrt 3

    def test_classical_fallback(self):
        inst = make([[1, 1], [1, -1]], [1, 1])
        assert quantum_storage_ok([1.0, 0.0], inst, 1.0, 0.0, 0.1)
        assert not quantum_storage_ok([1.0, 0.0], inst, 1.01, 0.0, 0.1)


class TestMaxMargin:
    def test_two_patterns(self):
        res = max_margin(make([[1, 1], [1, -1]], [1, 1]), tolerance=1e-9)
        assert res.kappa_hat == pytest.approx(1.0, abs=1e-9)
        assert res.w / np.linalg.norm(res.w) == pytest.approx([1.0, 0.0], abs=1e-6)
        assert res.status == "separable"

    def test_single_pattern(self):
        res = max_margin(make([[1, -1, 1, -1, 1]], [1]), tolerance=1e-9)
        assert res.kappa_hat == pytest.approx(math.sqrt(5), abs=1e-9)

    def test_contradiction(self):
        res = max_margin(make([[1, -1, 1], [-1, 1, -1]], [1, 1]))
        assert res.kappa_hat <= 1e-7
        assert res.status == "weak"

    def test_sphere_radius(self):
        inst = sample_instance(12, 8, 0.0, 0.0, seed=1)
        res = max_margin(inst)
        assert float(res.w @ res.w) == pytest.approx(12.0, rel=1e-9)

    def test_negative_instance(self):
        # 40 random patterns in 3 dimensions, far beyond capacity
        inst = sample_instance(3, 40, 0.0, 0.0, seed=8)
        res = max_margin(inst)
        assert res.status == "negative" and res.kappa_hat < 0
        assert not is_storable(res, 0.0, 1e-6)

    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("seed", range(8))
    def test_angle_grid(self, N, seed):
        rng = stream(seed, N)
        p = int(rng.integers(1, 2 * N + 1))
        inst = sample_instance(N, p, 0.0, 0.0, seed=seed)
        Y = inst.signed_patterns()
        res = max_margin(inst, tolerance=1e-9)
        best = angle_grid_margin(Y)
        assert res.kappa_hat <= math.sqrt(N) + 1e-9
        if res.status == "negative":
            assert best < 1e-3
        else:
            assert res.kappa_hat >= best - 1e-9
            assert res.kappa_hat == pytest.approx(best, abs=1e-2)  # grid spacing ~7e-3

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8), st.integers(1, 14), st.integers(0, 10**6))
    def test_feasibility_matches_enumeration(self, N, p, seed):
        inst = sample_instance(N, p, 0.0, 0.0, seed=seed)
        res = max_margin(inst)
        assert is_storable(res, 0.0, 1e-7) == cone_feasible(inst.signed_patterns())

    def test_certificate(self):
        inst = sample_instance(30, 40, 0.0, 0.0, seed=2)
        res = max_margin(inst, tolerance=1e-8)
        assert res.status == "separable"
        assert 0 <= res.gap <= 1e-8
