import math

import numpy as np
import pytest

from parajacobi.conjugation import (
    find_ellipticity_threshold,
    frame,
    phase_sum,
    scaled_discriminant,
    vartheta,
)
from parajacobi.errors import CriticalPointError, EllipticFailureError
from parajacobi.mat2 import parabolic_conjugator
from parajacobi.modulation import StolzVerdict, stolz_diagnostic
from parajacobi.periodic import monodromy


class TestVartheta:
    def test_scaling_identity_exact(self, m1_small):
        # vartheta_j * sqrt(a_{(j+1)N+i-1}) is independent of j
        x = -1.0
        for j in (0, 1, 7, 100):
            val = vartheta(m1_small, 0, j, x) * math.sqrt(m1_small.a(j))
            assert val == pytest.approx(math.sqrt(abs(m1_small.tau(x))), rel=1e-14)

    def test_block_one_value(self, m1_small):
        # tau(-1) = -1 and the second off-diagonal coefficient is 2^0.6
        assert vartheta(m1_small, 0, 1, -1.0) == pytest.approx(2.0 ** -0.3, rel=1e-14)

    def test_critical_point_rejected(self, m1_small):
        with pytest.raises(CriticalPointError):
            vartheta(m1_small, 0, 10, m1_small.tau.x0)


class TestFrame:
    def test_remainder_near_limit(self, m1):
        fr = frame(m1, 0, 10**5, -1.0)
        np.testing.assert_allclose(fr.R_limit, [[0, -1], [1, 0]], atol=0)
        assert np.linalg.norm(fr.R - fr.R_limit, 2) <= 0.05
        assert np.linalg.norm(fr.Q, 2) <= 0.02

    def test_frame_increment_trend(self, m1):
        x = -1.0
        q4 = np.linalg.norm(frame(m1, 0, 10**4, x).Q, 2)
        q5 = np.linalg.norm(frame(m1, 0, 10**5, x).Q, 2)
        assert q5 < q4

    def test_frame_determinant_formula(self, m1_small):
        # det Z = det T * (exp(-vartheta) - exp(vartheta)), nonzero off the
        # critical point
        fr = frame(m1_small, 0, 25, -1.0)
        det_t = np.linalg.det(m1_small.cache.T[0])
        expect = det_t * (math.exp(-fr.vartheta) - math.exp(fr.vartheta))
        assert np.linalg.det(fr.Z) == pytest.approx(expect, rel=1e-12)
        assert abs(np.linalg.det(fr.Z)) > 0

    def test_determinant_identity(self, m1_small):
        x = -0.9
        for j in (5, 50, 500):
            fr = frame(m1_small, 0, j, x)
            n = j * m1_small.N
            lhs = np.linalg.det(fr.Y)
            rhs = (m1_small.a(n - 1) / m1_small.a(n)) * (
                np.linalg.det(fr.Z) / np.linalg.det(fr.Z_next)
            )
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_eigenvalue_modulus_identity(self, m1_small):
        for j in (10, 100, 1000):
            fr = frame(m1_small, 0, j, -1.0)
            assert fr.elliptic
            assert abs(fr.lam) ** 2 == pytest.approx(np.linalg.det(fr.Y), abs=1e-10)

    def test_not_elliptic_in_discrete_halfline(self, m1_small):
        fr = frame(m1_small, 0, 10**4, 1.0)
        assert not fr.elliptic
        assert fr.theta is None

    def test_remainder_entries_bounded_variation_trend(self, m1_small):
        entries = np.array([frame(m1_small, 0, j, -1.0).R[0, 0] for j in range(1, 2001)])
        rep = stolz_diagnostic(entries, N=1)
        assert rep.verdict is StolzVerdict.CONVERGENT_TREND

    def test_conjugator_scale_invariance(self, m1_small):
        # rescaling the normal-form conjugator leaves the frames invariant
        x = -1.0
        fr = frame(m1_small, 0, 200, x)
        cache = m1_small.cache
        form2 = parabolic_conjugator(monodromy(m1_small.periodic, 0, 0.0), v_scale=2.0)
        saved = cache.T.copy()
        try:
            cache.T = np.array([form2.T])
            fr2 = frame(m1_small, 0, 200, x)
        finally:
            cache.T = saved
        assert fr2.theta == pytest.approx(fr.theta, abs=1e-10)
        np.testing.assert_allclose(fr2.Y, fr.Y, atol=1e-12)


class TestScaledDiscriminant:
    def test_reference_values(self, m1):
        val_neg = scaled_discriminant(m1, 0, 10**5, -1.0)
        assert abs(val_neg - (-4.0)) <= 0.05
        val_pos = scaled_discriminant(m1, 0, 10**5, 1.0)
        assert abs(val_pos - 4.0) <= 0.05

    def test_sign_flip_across_critical_point(self, m1):
        x0 = m1.tau.x0
        j = 10**4
        assert scaled_discriminant(m1, 0, j, x0 - 0.5) < 0
        assert scaled_discriminant(m1, 0, j, x0 + 0.5) > 0


class TestPhaseSum:
    def test_scaled_increment_limit(self, m1):
        ps = phase_sum(m1, 0, 10**5, 10**5 + 2, -1.0)
        target = math.sqrt(abs(m1.tau(-1.0)))
        assert abs(ps.scaled_increments[0] - target) <= 0.02

    def test_increments_in_range(self, m1_small):
        ps = phase_sum(m1_small, 0, 10, 200, -1.0)
        assert np.all(ps.thetas > 0)
        assert np.all(ps.thetas < np.pi)
        assert ps.total == pytest.approx(ps.thetas.sum(), rel=1e-12)

    def test_empty_range(self, m1_small):
        ps = phase_sum(m1_small, 0, 50, 50, -1.0)
        assert ps.total == 0.0
        assert ps.thetas.size == 0

    def test_elliptic_failure_in_discrete_halfline(self, m1_small):
        with pytest.raises(EllipticFailureError):
            phase_sum(m1_small, 0, 10**4, 10**4 + 5, 1.0)


class TestEllipticityThreshold:
    def test_small_threshold_deep_in_ac_halfline(self, m1_small):
        j0 = find_ellipticity_threshold(m1_small, 0, -1.0)
        assert j0 <= 16

    def test_failure_in_discrete_halfline(self, m1_small):
        with pytest.raises(EllipticFailureError):
            find_ellipticity_threshold(m1_small, 0, 1.0, j_max=1000)
