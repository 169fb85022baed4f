import numpy as np
import pytest

from conftest import model_from_arrays
from parajacobi.errors import GrowthRegimeError
from parajacobi.periodic import monodromy
from parajacobi.recurrence import (
    E1,
    E2,
    cd_kernel,
    eval_stream,
    pairs_at,
    transfer_B,
    transfer_X,
)


@pytest.fixture(scope="module")
def linear_model():
    # a_n = n + 1, b_n = 0
    n = np.arange(3000, dtype=float)
    return model_from_arrays(n + 1.0, np.zeros(3000))


class TestTransferB:
    def test_index_one(self, linear_model):
        np.testing.assert_allclose(transfer_B(linear_model, 1, 0.0),
                                   [[0, 1], [-0.5, 0]])

    def test_determinant_ratio(self, linear_model):
        for n in (1, 5, 17):
            det = np.linalg.det(transfer_B(linear_model, n, 0.3))
            assert det == pytest.approx(linear_model.a(n - 1) / linear_model.a(n))

    def test_index_zero_convention(self):
        m = model_from_arrays([1.0, 2.0, 3.0], [5.0, 0.0, 0.0])
        np.testing.assert_allclose(transfer_B(m, 0, 5.0), [[0, 1], [-1, 0]])


class TestTransferX:
    def test_period_one_equals_single_step(self, m1_small):
        x = -1.2
        np.testing.assert_array_equal(transfer_X(m1_small, 7, x),
                                      transfer_B(m1_small, 7, x))

    def test_determinant_telescopes(self):
        avals = np.linspace(1.0, 5.0, 64)
        m = model_from_arrays(avals, np.zeros(64), alpha=[1.0, 1.0], beta=[0.0, 0.0])
        for n in (1, 3, 10):
            det = np.linalg.det(transfer_X(m, n, 0.4))
            assert det == pytest.approx(m.a(n - 1) / m.a(n + m.N - 1), rel=1e-12)

    def test_converges_to_periodic_monodromy(self, m1):
        x = -1.0
        j = 10**5
        gap = np.abs(transfer_X(m1, j, x) - monodromy(m1.periodic, 0, 0.0)).max()
        assert gap <= 1e-2


class TestEvalStream:
    def test_first_polynomials(self, m1_small):
        tr = eval_stream(m1_small, E2, -0.5, 4)
        assert tr.values[0] == 1.0
        assert tr.values[1] == pytest.approx(
            (-0.5 - m1_small.b(0)) / m1_small.a(0)
        )

    def test_linear_coefficients_value(self, linear_model):
        tr = eval_stream(linear_model, E2, 0.0, 4)
        assert tr.values[2] == pytest.approx(-0.5)

    def test_second_solution_seed(self, linear_model):
        tr = eval_stream(linear_model, E1, 0.3, 3)
        assert tr.values[0] == 0.0
        assert tr.values[1] == pytest.approx(-1.0 / linear_model.a(0))

    def test_unit_norm_gate(self, m1_small):
        with pytest.raises(ValueError):
            eval_stream(m1_small, (1.0, 1.0), -1.0, 10)

    def test_growth_guard_trips_in_discrete_halfline(self, m1_small):
        with pytest.raises(GrowthRegimeError):
            eval_stream(m1_small, E2, 5.0, 100_000, store=False)

    def test_store_false_final_pair(self, m1_small):
        full = eval_stream(m1_small, E2, -1.0, 500)
        lean = eval_stream(m1_small, E2, -1.0, 500, store=False)
        assert lean.values is None
        assert lean.final_pair == pytest.approx(
            (full.values[499], full.values[500])
        )


class TestCocycleConsistency:
    def test_pairs_propagated_by_period_cocycle(self, m1_small):
        x = -0.8
        rng = np.random.default_rng(6)
        out = pairs_at(m1_small, [x], np.arange(0, 2000, dtype=np.int64))
        for _ in range(20):
            n = int(rng.integers(1, 1900))
            vec = out[n, :, 0]
            nxt = out[n + m1_small.N, :, 0]
            prop = transfer_X(m1_small, n, x) @ vec
            np.testing.assert_allclose(prop, nxt, rtol=1e-10, atol=1e-12)

    def test_bounded_scaled_pairs_in_ac_halfline(self, m1):
        # quarter-power boundedness: sqrt(a) * |pair|^2 stays bounded
        x = -1.0
        ns = np.unique(np.geomspace(2, 10**5, 200).astype(np.int64))
        out = pairs_at(m1, [x], ns)
        a_arr, _ = m1.coeff_arrays(int(ns[-1]) + 1)
        scaled = np.sqrt(a_arr[ns]) * (out[:, 0, 0] ** 2 + out[:, 1, 0] ** 2)
        early = scaled[ns <= 10**4].max()
        late = scaled[ns > 10**4].max()
        assert late <= 1.1 * early

    def test_wronskian_constant(self, m1_small):
        x = -1.3
        n_max = 3000
        p = eval_stream(m1_small, E2, x, n_max).values
        q = eval_stream(m1_small, E1, x, n_max).values
        a_arr, _ = m1_small.coeff_arrays(n_max)
        ns = np.array([1, 10, 100, 1000, 2999])
        w = a_arr[ns] * (p[ns + 1] * q[ns] - p[ns] * q[ns + 1])
        np.testing.assert_allclose(w, w[0], rtol=1e-9)


class TestCDKernel:
    def test_degree_zero(self, m1_small):
        assert cd_kernel(m1_small, 0, -1.0, -0.5) == 1.0

    def test_diagonal_monotone(self, m1_small):
        vals = [cd_kernel(m1_small, n, -1.0, -1.0) for n in (0, 10, 100, 1000)]
        assert vals[0] >= 1.0
        assert np.all(np.diff(vals) >= 0)

    def test_christoffel_darboux_identity(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            avals = rng.uniform(0.5, 2.0, 1100).cumsum() ** 0.5 + 1.0
            bvals = rng.uniform(-0.5, 0.5, 1100)
            m = model_from_arrays(avals, bvals)
            x, y = rng.uniform(-1.0, 1.0, 2)
            n = 1000
            p = eval_stream(m, E2, x, n + 1).values
            q = eval_stream(m, E2, y, n + 1).values
            lhs = (x - y) * cd_kernel(m, n, x, y)
            rhs = m.a(n) * (p[n + 1] * q[n] - p[n] * q[n + 1])
            assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)
