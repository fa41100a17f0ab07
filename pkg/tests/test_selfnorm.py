import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signspectra.covariance import CovModel, two_atom_sigma
from signspectra.distributions import gaussian, student_t
from signspectra.seeding import derive_stream
from signspectra.selfnorm import (
    Method,
    MomentEstimate,
    MomentSpec,
    integral_moment,
    mc_moment,
    quadform_stats,
    ratio_quadform_stats,
    self_normalize,
    theoretical_quadform_cov,
    theoretical_ratio_mean,
)


def random_symmetric_unit(p, seed):
    G = derive_stream(seed, 0).standard_normal((p, p))
    A = 0.5 * (G + G.T)
    return A / np.linalg.norm(A, 2)


class TestSelfNormalize:
    def test_three_four_five(self):
        np.testing.assert_allclose(self_normalize(np.array([3.0, 4.0])), [0.6, 0.8])

    def test_constant_vector(self):
        p = 9
        np.testing.assert_allclose(self_normalize(np.full(p, 2.5)), np.full(p, 1 / 3))

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            self_normalize(np.zeros(4))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 2000))
    def test_unit_norm_invariant(self, seed, p):
        z = derive_stream(seed, 0).standard_normal(p)
        y = self_normalize(z)
        assert abs(np.sum(y * y) - 1.0) < 1e-14


class TestMomentSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            MomentSpec((), 4)
        with pytest.raises(ValueError):
            MomentSpec((0,), 4)
        with pytest.raises(ValueError):
            MomentSpec((2, 2, 2), 2)

    def test_estimate_invariant(self):
        with pytest.raises(ValueError):
            MomentEstimate(1.0, 0.0, Method.MONTE_CARLO)
        with pytest.raises(ValueError):
            MomentEstimate(1.0, 0.1, Method.INTEGRAL)


class TestMcMoment:
    def test_second_moment_is_one_over_p(self):
        for i, dist in enumerate([gaussian(), student_t(2.0)]):
            est = mc_moment(dist, MomentSpec((2,), 24), 50_000, derive_stream(30, i))
            assert abs(est.value - 1 / 24) < 3 * est.stderr

    def test_gaussian_fourth_moment_closed_form(self):
        # Y_1^2 is Beta(1/2, (p-1)/2) under Gaussian coordinates:
        # E Y_1^4 = 3 / (p (p+2))
        est = mc_moment(gaussian(), MomentSpec((4,), 16), 200_000, derive_stream(31, 0))
        assert abs(est.value - 3 / 288) < 3 * est.stderr

    def test_square_sum_identity(self):
        # 1 = p E Y1^4 + p(p-1) E Y1^2 Y2^2
        p = 64
        dist = student_t(3.0)
        e4 = mc_moment(dist, MomentSpec((4,), p), 200_000, derive_stream(32, 0))
        e22 = mc_moment(dist, MomentSpec((2, 2), p), 200_000, derive_stream(32, 1))
        total = p * e4.value + p * (p - 1) * e22.value
        spread = math.hypot(p * e4.stderr, p * (p - 1) * e22.stderr)
        assert abs(total - 1.0) < 3 * spread

    def test_odd_exponent_pair_vanishes(self):
        # E Y1 Y2 = o(p^{-3/2}); the estimate must be consistent with zero
        for p in (64, 256):
            est = mc_moment(student_t(2.5), MomentSpec((1, 1), p), 100_000, derive_stream(33, p))
            assert abs(est.value) < 5 * est.stderr

    def test_reps_validation(self):
        with pytest.raises(ValueError):
            mc_moment(gaussian(), MomentSpec((2,), 8), 50, derive_stream(0, 0))


class TestIntegralMoment:
    def test_second_moment_exact(self):
        for dist in (gaussian(), student_t(5.0), student_t(3.0, standardized=False)):
            est = integral_moment(dist, MomentSpec((2,), 32))
            assert est.value == pytest.approx(1 / 32, abs=1e-6)
            assert est.stderr == 0.0

    def test_gaussian_fourth_moment(self):
        est = integral_moment(gaussian(), MomentSpec((4,), 16))
        assert est.value == pytest.approx(3 / 288, abs=1e-6)

    def test_cross_checks_monte_carlo(self):
        dist = student_t(5.0)
        spec = MomentSpec((2, 2), 64)
        mc = mc_moment(dist, spec, 300_000, derive_stream(34, 0))
        integ = integral_moment(dist, spec)
        assert abs(mc.value - integ.value) < 3 * mc.stderr

    def test_scale_invariance(self):
        a = integral_moment(student_t(5.0), MomentSpec((4,), 32)).value
        b = integral_moment(student_t(5.0, standardized=False), MomentSpec((4,), 32)).value
        assert a == pytest.approx(b, rel=1e-8)

    def test_odd_exponent_rejected(self):
        with pytest.raises(ValueError):
            integral_moment(gaussian(), MomentSpec((3,), 8))


class TestMomentScalings:
    """Finite-p approach to the self-normalized moment limits.

    The limiting values are p^2 E[Y1^2 Y2^2] -> 1 and p^2 E[Y1^4] -> tau.
    Convergence is slow for heavy tails (roughly 1/log p at tail index 2 and
    p^{-1/4} at 4.5), so the assertions pin the measured monotone approach
    rather than proximity to the limit; the measured values at p = 1024 are
    0.869 (tail index 2) and 9.22 / tau = 15 (tail index 4.5).
    """

    PS = (64, 256, 1024)

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [2.0, 4.5])
    def test_pair_moment_approaches_one(self, alpha):
        dist = student_t(alpha, standardized=(alpha > 2))
        vals = [p**2 * integral_moment(dist, MomentSpec((2, 2), p)).value for p in self.PS]
        gaps = [abs(v - 1.0) for v in vals]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < (0.10 if alpha > 2 else 0.15)

    @pytest.mark.slow
    def test_quartic_moment_scalings(self):
        heavy = student_t(2.0, standardized=False)
        vals = [p * integral_moment(heavy, MomentSpec((4,), p)).value for p in self.PS]
        assert vals[0] > vals[1] > vals[2] > 0

        light = student_t(4.5)
        tau = light.tau
        scaled = [p**2 * integral_moment(light, MomentSpec((4,), p)).value for p in self.PS]
        gaps = [abs(s - tau) for s in scaled]
        assert gaps[0] > gaps[1] > gaps[2]
        assert scaled[2] > 0.55 * tau


class TestQuadform:
    def test_identity_matrix_is_degenerate(self):
        p = 32
        st_ = quadform_stats(gaussian(), p, np.eye(p), np.eye(p), 2000, derive_stream(35, 0))
        assert st_.mean_a == pytest.approx(1.0, abs=1e-14)
        assert st_.var_a == pytest.approx(0.0, abs=1e-28)

    def test_mean_matches_trace_over_p(self):
        p = 64
        A = random_symmetric_unit(p, 36)
        st_ = quadform_stats(student_t(2.5), p, A, A, 100_000, derive_stream(36, 1))
        assert abs(st_.mean_a - np.trace(A) / p) < 3 * st_.mean_a_stderr

    def test_alternating_diagonal_gaussian_covariance(self):
        # trace-free diagonal A with tau = 3: only the 2 tr(A^2)/p^2 term stays
        p = 128
        A = np.diag(np.where(np.arange(p) % 2 == 0, 1.0, -1.0))
        st_ = quadform_stats(gaussian(), p, A, A, 5000, derive_stream(37, 0))
        theory = theoretical_quadform_cov(A, A, 3.0, p)
        assert theory == pytest.approx(2 / p)
        assert abs(st_.cov_ab - theory) < 3 * st_.cov_ab_stderr

    def test_student_t6_covariance_formula(self):
        # the formula carries an o(1/p) residual (~ -4% of the value at
        # p = 128 for this population), so the Monte Carlo size is kept where
        # sampling noise dominates that residual
        p = 128
        A = random_symmetric_unit(p, 38)
        dist = student_t(6.0)
        st_ = quadform_stats(dist, p, A, A, 1500, derive_stream(38, 1))
        theory = theoretical_quadform_cov(A, A, dist.tau, p)
        assert abs(st_.cov_ab - theory) < 3 * st_.cov_ab_stderr

    def test_asymmetric_input_rejected(self):
        p = 8
        A = np.arange(64, dtype=float).reshape(8, 8)
        with pytest.raises(ValueError):
            quadform_stats(gaussian(), p, A, A, 2000, derive_stream(0, 0))


class TestRatioQuadform:
    def test_matching_matrices_are_degenerate(self):
        p = 16
        cov = two_atom_sigma(p)
        st_ = ratio_quadform_stats(
            gaussian(), p, cov.matrix(), cov, 2000, derive_stream(39, 0)
        )
        assert st_.mean == pytest.approx(1.0, abs=1e-14)
        assert st_.var == pytest.approx(0.0, abs=1e-28)

    def test_identity_sigma_reduces_to_quadform(self):
        p = 32
        A = random_symmetric_unit(p, 40)
        rng_a = derive_stream(41, 0)
        rng_b = derive_stream(41, 0)
        qf = quadform_stats(gaussian(), p, A, A, 5000, rng_a)
        rf = ratio_quadform_stats(gaussian(), p, A, CovModel.identity(p), 5000, rng_b)
        assert rf.mean == pytest.approx(qf.mean_a, rel=1e-12)

    def test_student_t6_expansion(self):
        p = 128
        cov = two_atom_sigma(p)
        A = np.diag(cov.diag_vector**2)
        dist = student_t(6.0)
        st_ = ratio_quadform_stats(dist, p, A, cov, 200_000, derive_stream(42, 0))
        theory = theoretical_ratio_mean(A, cov, dist.tau, p)
        assert abs(st_.mean - theory) < 3 * st_.mean_stderr + 0.5 / p
