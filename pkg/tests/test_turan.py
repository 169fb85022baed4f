import numpy as np
import pytest

from parajacobi.errors import (
    HorizonExhaustedError,
    HyperbolicTruncationError,
    OutsideBandError,
)
from parajacobi.modulation import ExplicitDecay, GeometricDecay, Power, PowerDecay, build_model, perturb
from parajacobi.periodic import PeriodicParams
from parajacobi.recurrence import E2, eval_stream
from parajacobi.turan import (
    density,
    density_grid,
    g_limit,
    gen_turan,
    perturbed_density,
    truncated_density,
    truncated_params,
    turan,
)


class TestTuranDeterminant:
    def test_matches_direct_stream(self, m1_small):
        x = -1.1
        p = eval_stream(m1_small, E2, x, 60).values
        for n in (1, 10, 50):
            expect = p[n] * p[n] - p[n - 1] * p[n + 1]
            assert turan(m1_small, n, x) == pytest.approx(expect, rel=1e-14)

    def test_generalized_reduces_to_scaled_determinant(self, m1_small):
        x = -0.7
        for n in (3, 30, 300):
            lhs = gen_turan(m1_small, E2, n, x)
            rhs = m1_small.a(n + m1_small.N - 1) ** 1.5 * turan(m1_small, n, x)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_sign_flip_of_seed(self, m1_small):
        x = -0.7
        minus_e2 = (0.0, -1.0)
        assert abs(gen_turan(m1_small, minus_e2, 40, x)) == pytest.approx(
            abs(gen_turan(m1_small, E2, 40, x)), rel=1e-12
        )

    def test_generalized_cauchy_random_seed(self, m1):
        # scaled generalized determinants settle along dyadic block indices
        eta = (np.sin(0.3), np.cos(0.3))
        x = -1.0
        s4 = abs(gen_turan(m1, eta, 10**4, x))
        s5 = abs(gen_turan(m1, eta, 10**5, x))
        assert abs(s5 - s4) / s5 <= 0.01

    def test_scaled_cauchy_trend_reference(self, m1):
        x = -1.0
        g3 = m1.a(10**3) ** 1.5 * abs(turan(m1, 10**3, x))
        g4 = m1.a(10**4) ** 1.5 * abs(turan(m1, 10**4, x))
        g5 = m1.a(10**5) ** 1.5 * abs(turan(m1, 10**5, x))
        # slow power-law convergence: consecutive decades tighten
        assert abs(g5 - g4) < abs(g4 - g3)
        assert abs(g5 - g4) / g5 <= 0.01


class TestGLimit:
    def test_converges_at_reference_point(self, m1):
        st = g_limit(m1, 0, -1.0, rel_tol=1e-3)
        assert st.converged
        assert st.g_estimate > 0
        assert st.cauchy_gap < 1e-3

    def test_rejects_discrete_halfline(self, m1_small):
        with pytest.raises(OutsideBandError):
            g_limit(m1_small, 0, 1.0)

    def test_sign_eventually_constant(self, m1):
        st = g_limit(m1, 0, -1.0, rel_tol=1e-3)
        tail = st.signs[len(st.signs) // 10:]
        assert np.all(tail == tail[0])

    def test_horizon_exhausted_flagged(self, m1_small):
        st = g_limit(m1_small, 0, -1.0, rel_tol=1e-12)
        assert not st.converged
        with pytest.raises(HorizonExhaustedError) as err:
            density(m1_small, 0, -1.0, rel_tol=1e-12)
        assert err.value.state is not None


class TestDensity:
    def test_reference_value_regression(self, m1):
        mu = density(m1, 0, -1.0, rel_tol=1e-3)
        assert mu == pytest.approx(0.392, abs=0.002)

    def test_cross_residue_consistency(self):
        p = PeriodicParams(2, [1.0, 1.0], [1.5, 0.0])
        m = build_model(p, Power(gamma=0.6), horizon=2_100_000)
        rel_tol = 2e-3
        mu0 = density(m, 0, -1.0, rel_tol=rel_tol)
        mu1 = density(m, 1, -1.0, rel_tol=rel_tol)
        assert abs(mu0 - mu1) <= 2 * rel_tol * mu0

    def test_laguerre_weight_recovered(self, laguerre0):
        mu = density(laguerre0, 0, 1.0, rel_tol=1e-3)
        assert abs(mu * np.e - 1.0) <= 0.01

    def test_bounded_toward_critical_point(self, m1):
        # g stays bounded below, so mu' * sqrt|tau| stays bounded; g itself
        # blows up toward the edge (the density vanishes extremely fast there,
        # confirmed independently by truncation quadrature)
        ref = g_limit(m1, 0, -1.0, rel_tol=5e-2).g_estimate
        for x in (-0.4, -0.2, -0.1):
            st = g_limit(m1, 0, x, rel_tol=5e-2)
            assert st.g_estimate >= 0.5 * ref
            mu_scaled = abs(m1.tau(x)) / (np.pi * st.g_estimate)
            assert mu_scaled <= 1.0


class TestDensityGrid:
    def test_matches_scalar_calls(self, m1):
        grid = np.array([-1.5, -1.0, -0.5])
        table = density_grid(m1, 0, grid, rel_tol=1e-3)
        for k, x in enumerate(grid):
            assert table.mu_prime[k] == pytest.approx(
                density(m1, 0, float(x), rel_tol=1e-3), rel=1e-12
            )
        assert table.converged.all()
        assert not table.flags["conjectural"]
        # definitional identity tying the table columns together
        np.testing.assert_allclose(
            table.mu_prime * np.pi * table.g_values,
            np.sqrt(np.abs(table.tau_values)),
            rtol=1e-12,
        )

    def test_residue_validated(self, m1_small):
        with pytest.raises(ValueError):
            density(m1_small, 1, -1.0)

    def test_grid_must_stay_in_ac_halfline(self, m1_small):
        with pytest.raises(OutsideBandError):
            density_grid(m1_small, 0, np.linspace(-1.0, 1.0, 5))

    def test_laguerre_conjectural_flag(self, laguerre0):
        table = density_grid(laguerre0, 0, np.array([0.5, 1.0, 2.0]), rel_tol=1e-3)
        assert table.flags["conjectural"]
        assert not table.flags["increments_vanish"]


class TestTruncatedRoute:
    def test_coefficients_unchanged_below_cut(self, m1_small):
        mt = truncated_params(m1_small, 100)
        a0, b0 = m1_small.coeff_arrays(100)
        a1, b1 = mt.coeff_arrays(100)
        np.testing.assert_array_equal(a0, a1)
        np.testing.assert_array_equal(b0, b1)

    def test_tail_is_periodic(self):
        p = PeriodicParams(2, [1.0, 1.0], [1.5, 0.0])
        m = build_model(p, Power(gamma=0.6), horizon=10_000)
        L = 50
        mt = truncated_params(m, L)
        assert mt.a(L + 2 + 3) == m.a(L + 1)  # residue (L+5-L) mod 2 = 1
        assert mt.a(L + 2) == m.a(L)
        assert mt.b(L + 7) == m.b(L + 1)

    def test_stationary_determinants(self, m1_small):
        x = -0.9
        L = 80
        mt = truncated_params(m1_small, L)
        base = turan(mt, L + 1, x)
        for k in range(2, 6):
            val = turan(mt, L + k, x)
            assert val == pytest.approx(base, rel=1e-10)

    def test_matches_turan_density(self, m1):
        mu_t = truncated_density(m1, 10**5, -1.0)
        mu = density(m1, 0, -1.0, rel_tol=1e-3)
        assert abs(mu_t - mu) / mu <= 0.02

    def test_formula_consistency_with_limit_form(self, m1):
        # the scaled-discriminant factor approaches 4 alpha |tau|, so the
        # truncated formula approaches the Turan-limit formula
        x = -1.0
        L = 10**5
        mt = truncated_params(m1, L)
        d_val = abs(turan(mt, L + 1, x))
        g_like = m1.a(L) ** 1.5 * d_val
        mu_closed = np.sqrt(abs(m1.tau(x))) / (np.pi * g_like)
        mu_t = truncated_density(m1, L, x)
        assert abs(mu_t - mu_closed) / mu_closed <= 0.02

    def test_discrete_halfline_rejected(self, m1_small):
        with pytest.raises(HyperbolicTruncationError):
            truncated_density(m1_small, 500, 1.0)


class TestPerturbedDensity:
    def test_zero_perturbation_equals_density(self, m1):
        mp = perturb(m1, xi=ExplicitDecay(np.zeros(4)))
        mu_p = perturbed_density(mp, 0, -1.0, rel_tol=1e-3)
        mu = density(m1, 0, -1.0, rel_tol=1e-3)
        assert mu_p == pytest.approx(mu, rel=1e-12)

    def test_geometric_perturbation_value_regression(self, m1):
        mp = perturb(m1, xi=GeometricDecay(1.0))
        mu_p = perturbed_density(mp, 0, -1.0, rel_tol=1e-3)
        assert mu_p == pytest.approx(0.178, abs=0.004)

    def test_non_summable_flag_carried(self, m1_small):
        with pytest.warns(UserWarning):
            mp = perturb(m1_small, xi=PowerDecay(p=1.0))
        table = density_grid(mp, 0, np.array([-1.0, -0.8]), rel_tol=5e-2)
        assert table.flags["summable_perturbation"] is False
        with pytest.warns(UserWarning):
            perturbed_density(mp, 0, -1.0, rel_tol=5e-2)
