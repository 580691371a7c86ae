import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import power_iteration_norm, random_density_matrix
from steerbound.errors import InvalidInputError
from steerbound.numerics import (
    kron,
    log_binomial,
    max_eigenvalue_hermitian,
    operator_norm,
    partial_trace_first,
)


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(np.eye(2)) == pytest.approx(1.0, rel=1e-10)

    def test_rank_one(self):
        v = np.array([1.0, 1j])  # |v|^2 = 2
        assert operator_norm(np.outer(v, v.conj())) == pytest.approx(2.0, rel=1e-10)

    def test_matches_power_iteration(self):
        m = _random_complex(np.random.default_rng(6), 6, 6)
        assert abs(operator_norm(m) - power_iteration_norm(m)) < 1e-9

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            operator_norm(np.array([[1.0, np.nan], [0, 1]]))

    def test_adjoint_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = _random_complex(rng, 5, 3)
            assert abs(operator_norm(m) - operator_norm(m.conj().T)) < 1e-10

    def test_triangle_inequality(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b = _random_complex(rng, 4, 4), _random_complex(rng, 4, 4)
            assert operator_norm(a + b) <= operator_norm(a) + operator_norm(b) + 1e-9


class TestMaxEigenvalue:
    def test_diagonal(self):
        assert max_eigenvalue_hermitian(np.diag([1.0, 3.0, 2.0])) == pytest.approx(3.0, rel=1e-10)

    def test_two_projectors(self):
        u = np.array([1.0, 0.0])
        v = np.array([math.cos(0.4), 1j * math.sin(0.4)])
        m = np.outer(u, u.conj()) + np.outer(v, v.conj())
        assert max_eigenvalue_hermitian(m) == pytest.approx(1 + abs(np.vdot(u, v)), rel=1e-10)

    def test_psd_shift_oracle(self):
        rng = np.random.default_rng(8)
        a = _random_complex(rng, 8, 8)
        h = 0.5 * (a + a.conj().T)
        shift = operator_norm(h)
        # h + shift*I is PSD, so its norm is lambda_max + shift
        oracle = operator_norm(h + shift * np.eye(8)) - shift
        assert abs(max_eigenvalue_hermitian(h) - oracle) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidInputError):
            max_eigenvalue_hermitian(np.array([[0, 1], [0, 0]]))

    def test_stacked(self):
        stack = np.array([np.diag([1.0, 2.0]), np.diag([5.0, -1.0])])
        np.testing.assert_allclose(max_eigenvalue_hermitian(stack), [2.0, 5.0])


class TestKron:
    def test_identities(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_scalar(self):
        m = np.arange(4.0).reshape(2, 2)
        np.testing.assert_array_equal(kron([[2.0]], m), 2 * m)

    def test_elementwise(self):
        rng = np.random.default_rng(3)
        a, b = _random_complex(rng, 2, 2), _random_complex(rng, 3, 3)
        k = kron(a, b)
        assert k.shape == (6, 6)
        for i in range(2):
            for j in range(2):
                for p in range(3):
                    for q in range(3):
                        assert abs(k[i * 3 + p, j * 3 + q] - a[i, j] * b[p, q]) < 1e-14


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(4)
        sa, sb = random_density_matrix(rng, 2), random_density_matrix(rng, 3)
        np.testing.assert_allclose(partial_trace_first(np.kron(sa, sb), 2, 3), sb, atol=1e-12)

    def test_maximally_entangled(self):
        d = 3
        psi = np.eye(d).reshape(-1) / math.sqrt(d)
        np.testing.assert_allclose(partial_trace_first(np.outer(psi, psi), d, d), np.eye(d) / d, atol=1e-12)

    def test_index_summation_oracle(self):
        rho = random_density_matrix(np.random.default_rng(5), 4)
        oracle = np.zeros((2, 2), dtype=complex)
        for j in range(2):
            for l in range(2):
                oracle[j, l] = sum(rho[i * 2 + j, i * 2 + l] for i in range(2))
        out = partial_trace_first(rho, 2, 2)
        np.testing.assert_allclose(out, oracle, atol=1e-12)
        assert abs(np.trace(out) - np.trace(rho)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            partial_trace_first(np.eye(6), 2, 2)


class TestLogBinomial:
    def test_small(self):
        assert log_binomial(1, 1) == 0.0
        assert log_binomial(4, 2) == pytest.approx(math.log(6), abs=1e-15)

    def test_lgamma_identity(self):
        oracle = math.lgamma(1001) - 2 * math.lgamma(501)
        assert abs(log_binomial(1000, 500) - oracle) < 1e-10

    def test_exact_up_to_30(self):
        for n in range(31):
            for k in range(n + 1):
                assert round(math.exp(log_binomial(n, k))) == math.comb(n, k)

    @pytest.mark.parametrize("n,k", [(1001, 400), (20000, 3), (10**5, 31415), (10**6, 1), (10**6, 16), (10**6, 361153), (10**6, 500000)])
    def test_large_against_mpmath(self, n, k):
        import mpmath

        with mpmath.workdps(40):
            oracle = mpmath.log(mpmath.binomial(n, k))
            assert abs(mpmath.mpf(log_binomial(n, k)) - oracle) <= 1e-10

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            log_binomial(3, 4)
        with pytest.raises(InvalidInputError):
            log_binomial(3, -1)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=1, max_value=5000), st.data())
    def test_pascal_rule(self, n, data):
        k = data.draw(st.integers(min_value=1, max_value=n))
        lhs = math.exp(log_binomial(n, k) - log_binomial(n + 1, k))
        rhs = math.exp(log_binomial(n, k - 1) - log_binomial(n + 1, k))
        assert lhs + rhs == pytest.approx(1.0, abs=1e-9)
