import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e, legendre

from pcopt.orthopoly import (
    Basis,
    PolynomialFamily,
    eval_multivariate,
    eval_orthonormal,
    eval_orthonormal_all,
    recurrence_coeffs,
    total_degree_indices,
)
from pcopt.quadrature import product_gauss_rule

H, L = PolynomialFamily.HERMITE, PolynomialFamily.LEGENDRE


def moment_beta(family, n):
    """Recurrence betas from weight moments (Chebyshev algorithm via Gram matrix)."""
    if family is H:
        nodes, w = hermite_e.hermegauss(40)
        w = w / w.sum()
    else:
        nodes, w = legendre.leggauss(40)
        w = w / 2.0
    # monic polynomials by Stieltjes on an independent numpy rule
    betas, p_prev, p = [1.0], np.zeros_like(nodes), np.ones_like(nodes)
    for k in range(n - 1):
        a = np.sum(w * nodes * p * p) / np.sum(w * p * p)
        b = np.sum(w * p * p) / np.sum(w * p_prev * p_prev) if k > 0 else 0.0
        p_prev, p = p, (nodes - a) * p - b * p_prev
        betas.append(np.sum(w * p * p) / np.sum(w * p_prev * p_prev))
    return np.array(betas)


class TestRecurrence:
    def test_hermite_three(self):
        alpha, beta = recurrence_coeffs(H, 3)
        np.testing.assert_array_equal(alpha, [0, 0, 0])
        np.testing.assert_allclose(beta, [1, 1, 2])

    def test_legendre_three(self):
        alpha, beta = recurrence_coeffs(L, 3)
        np.testing.assert_array_equal(alpha, [0, 0, 0])
        np.testing.assert_allclose(beta, [1, 1 / 3, 4 / 15])

    def test_hermite_one(self):
        alpha, beta = recurrence_coeffs(H, 1)
        assert list(alpha) == [0] and list(beta) == [1]

    @pytest.mark.parametrize("family", [H, L])
    def test_matches_moment_oracle(self, family):
        _, beta = recurrence_coeffs(family, 8)
        np.testing.assert_allclose(beta, moment_beta(family, 8), rtol=1e-10)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            recurrence_coeffs(H, 0)
        with pytest.raises((ValueError, TypeError)):
            recurrence_coeffs("chebyshev", 3)


def explicit(family, k, t):
    if family is H:
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        return hermite_e.hermeval(t, coef) / math.sqrt(math.factorial(k))
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    return legendre.legval(t, coef) * math.sqrt(2 * k + 1)


class TestEvaluation:
    @pytest.mark.parametrize("family", [H, L])
    def test_degree_zero_is_one(self, family):
        t = np.linspace(-1, 1, 7)
        np.testing.assert_array_equal(eval_orthonormal(family, 0, t), np.ones(7))

    def test_known_values(self):
        assert eval_orthonormal(H, 2, 0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
        assert eval_orthonormal(L, 1, 1.0) == pytest.approx(math.sqrt(3), abs=1e-15)

    @pytest.mark.parametrize("family", [H, L])
    @pytest.mark.parametrize("k", range(4))
    def test_against_explicit_formulas(self, family, k):
        rng = np.random.default_rng(k)
        t = rng.uniform(-1, 1, 100) * (3 if family is H else 1)
        np.testing.assert_allclose(eval_orthonormal(family, k, t), explicit(family, k, t), atol=1e-12, rtol=1e-12)

    def test_all_degrees_shape(self):
        vals = eval_orthonormal_all(H, 4, np.zeros((2, 3)))
        assert vals.shape == (2, 3, 5)

    @pytest.mark.parametrize("family", [H, L])
    def test_orthonormal_to_degree_four(self, family):
        rule = product_gauss_rule([family], 6)
        V = eval_orthonormal_all(family, 4, rule.nodes[:, 0])
        gram = (V * rule.weights[:, None]).T @ V
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)


class TestIndices:
    def test_one_dim(self):
        assert total_degree_indices(1, 2) == [(0,), (1,), (2,)]

    def test_two_dim_order_one(self):
        assert total_degree_indices(2, 1) == [(0, 0), (1, 0), (0, 1)]

    def test_two_dim_order_two(self):
        idx = total_degree_indices(2, 2)
        assert len(idx) == 6
        assert idx[3:] == [(2, 0), (1, 1), (0, 2)]

    @pytest.mark.parametrize("p", range(1, 5))
    @pytest.mark.parametrize("r", range(0, 7))
    def test_count_closed_form(self, p, r):
        idx = total_degree_indices(p, r)
        assert len(idx) == math.comb(r + p, r)
        assert len(set(idx)) == len(idx)
        degrees = [sum(i) for i in idx]
        assert degrees == sorted(degrees)


class TestMultivariate:
    def test_zero_index(self):
        basis = Basis((H, L), 2)
        assert eval_multivariate(basis, (0, 0), (0.3, -0.2)) == 1.0

    def test_products(self):
        basis = Basis((H, H), 2)
        assert eval_multivariate(basis, (1, 1), (1.0, 1.0)) == pytest.approx(1.0)
        assert eval_multivariate(basis, (2, 0), (0.0, 5.0)) == pytest.approx(-1 / math.sqrt(2))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            eval_multivariate(Basis((H, H), 1), (1, 0), (1.0,))

    @pytest.mark.parametrize("families", [(H, H), (H, L), (L, L, H)])
    def test_basis_orthonormal_to_degree_four(self, families):
        basis = Basis(families, 4)
        rule = product_gauss_rule(families, 5)
        V = basis.evaluate(rule.nodes)
        gram = (V * rule.weights[:, None]).T @ V
        np.testing.assert_allclose(gram, np.eye(len(basis)), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=2))
    def test_evaluate_matches_pointwise(self, t):
        basis = Basis((H, L), 3)
        t = [t[0], t[1] / 3]
        row = basis.evaluate(np.array([t]))[0]
        for k, idx in enumerate(basis.index_set):
            assert row[k] == pytest.approx(eval_multivariate(basis, idx, t), abs=1e-12)
