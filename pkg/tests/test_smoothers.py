import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from modelsel.smoothers import (
    COND_LIMIT, LinearSmoother, SingularDesignError, effective_dof, gram_solve,
    identity_smoother, mean_smoother, ols_hat, predict, ridge_hat,
)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestOlsHat:
    def test_ones_column_gives_mean_smoother(self):
        s = ols_hat(np.ones((5, 1)))
        np.testing.assert_allclose(s.gamma, np.full((5, 5), 0.2), atol=1e-15)

    def test_square_invertible_is_identity(self, rng):
        s = ols_hat(rng.standard_normal((4, 4)))
        np.testing.assert_allclose(s.gamma, np.eye(4), atol=1e-10)

    def test_matches_normal_equations(self, rng):
        X, y = rng.standard_normal((6, 2)), rng.standard_normal(6)
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        np.testing.assert_allclose(predict(ols_hat(X), y), X @ beta, atol=1e-10)

    def test_projection_properties(self, rng):
        X = rng.standard_normal((15, 4))
        g = ols_hat(X).gamma
        np.testing.assert_allclose(g, g.T, atol=1e-8)
        np.testing.assert_allclose(g @ g, g, atol=1e-8)
        np.testing.assert_allclose(g @ X, X, atol=1e-8)
        assert abs(np.trace(g) - 4) < 1e-6

    def test_residuals_orthogonal_to_columns(self, rng):
        X, y = rng.standard_normal((20, 3)), rng.standard_normal(20)
        res = y - predict(ols_hat(X), y)
        np.testing.assert_allclose(X.T @ res, 0, atol=1e-8)

    def test_singular_design_names_condition(self):
        X = np.column_stack([np.arange(5.0), 2 * np.arange(5.0)])
        with pytest.raises(SingularDesignError, match="condition estimate") as info:
            ols_hat(X)
        assert not info.value.cond <= COND_LIMIT

    def test_design_dim_recorded(self, rng):
        assert ols_hat(rng.standard_normal((7, 3))).design_dim == 3


class TestRidgeHat:
    def test_alpha_zero_is_ols(self, rng):
        X = rng.standard_normal((9, 3))
        np.testing.assert_allclose(ridge_hat(X, 0.0).gamma, ols_hat(X).gamma, atol=1e-10)

    def test_identity_design(self, rng):
        y = rng.standard_normal(5)
        np.testing.assert_allclose(predict(ridge_hat(np.eye(5), 0.7), y), y / 1.7, atol=1e-14)

    def test_dof_strictly_decreasing(self, rng):
        X = rng.standard_normal((12, 4))
        dofs = [effective_dof(ridge_hat(X, a)) for a in (0, 0.1, 1, 10)]
        assert all(a > b for a, b in zip(dofs, dofs[1:]))

    def test_dof_matches_eigenvalues(self, rng):
        X = rng.standard_normal((12, 4))
        lam = np.linalg.eigvalsh(X.T @ X)
        for a in (0.01, 1.0, 30.0):
            assert abs(effective_dof(ridge_hat(X, a)) - np.sum(lam / (lam + a))) < 1e-8

    def test_dof_range_and_small_alpha_limit(self, rng):
        X = rng.standard_normal((10, 3))
        for a in (1e-8, 1e-2, 1e2, 1e6):
            assert 0 < effective_dof(ridge_hat(X, a)) <= 3
        assert abs(effective_dof(ridge_hat(X, 1e-9)) - 3) < 1e-6

    def test_negative_alpha(self, rng):
        with pytest.raises(ValueError):
            ridge_hat(rng.standard_normal((4, 2)), -1.0)

    def test_penalty_rescues_collinear_design(self):
        X = np.column_stack([np.arange(5.0), 2 * np.arange(5.0)])
        assert np.isfinite(effective_dof(ridge_hat(X, 1.0)))


class TestSmootherBasics:
    def test_mean_smoother_dof(self):
        assert effective_dof(mean_smoother(5)) == pytest.approx(1.0)

    def test_identity_dof(self):
        assert effective_dof(identity_smoother(7)) == 7

    def test_mean_smoother_predict(self):
        np.testing.assert_allclose(predict(mean_smoother(2), [1, 3]), [2, 2])

    def test_identity_predict(self, rng):
        y = rng.standard_normal(4)
        np.testing.assert_array_equal(predict(identity_smoother(4), y), y)

    def test_predict_length_mismatch(self):
        with pytest.raises(ValueError):
            predict(mean_smoother(3), [1.0, 2.0])

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            LinearSmoother(np.zeros((2, 3)))

    def test_gram_solve_matches_numpy(self, rng):
        X, b = rng.standard_normal((8, 3)), rng.standard_normal(3)
        np.testing.assert_allclose(gram_solve(X, b, 0.5),
                                   np.linalg.solve(X.T @ X + 0.5 * np.eye(3), b))

    @settings(max_examples=50, deadline=None)
    @given(y1=arrays(float, 8, elements=st.floats(-100, 100)),
           y2=arrays(float, 8, elements=st.floats(-100, 100)),
           a=st.floats(-10, 10), b=st.floats(-10, 10))
    def test_predict_is_linear(self, y1, y2, a, b):
        s = ridge_hat(np.random.default_rng(0).standard_normal((8, 3)), 0.3)
        lhs = predict(s, a * y1 + b * y2)
        rhs = a * predict(s, y1) + b * predict(s, y2)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * (1 + np.abs(rhs).max()))
