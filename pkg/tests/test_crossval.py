import numpy as np
import pytest

from modelsel.crossval import (
    FoldError, StoppingMonitor, UndefinedLOOCVError, gcv, kfold_cv, loocv, loocv_shortcut,
    mean_learner, monitor_step, ols_learner, ridge_learner, tune_with_validation,
    zero_learner,
)
from modelsel.dataset import Dataset, Split, generate_synthetic, SyntheticSpec
from modelsel.regularize import add_intercept
from modelsel.smoothers import identity_smoother, mean_smoother, ols_hat, predict, ridge_hat


def _random_ds(rng, n, d):
    X = rng.standard_normal((n, d))
    return Dataset(X, X @ rng.standard_normal(d) + rng.standard_normal(n))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestKFold:
    def test_zero_learner_on_zero_labels(self):
        ds = Dataset(np.arange(10.0)[:, None], np.zeros(10))
        res = kfold_cv(ds, 5, zero_learner)
        assert res.fold_errors == (0.0,) * 5 and res.mean_error == 0.0

    def test_k_equals_n_matches_loocv(self, rng):
        ds = _random_ds(rng, 12, 2)
        a = kfold_cv(ds, 12, ols_learner())
        b = loocv(ds, ols_learner())
        assert sorted(a.fold_errors) == sorted(b.fold_errors)
        assert a.mean_error == b.mean_error

    def test_deterministic(self, rng):
        ds = _random_ds(rng, 20, 3)
        assert kfold_cv(ds, 4, ols_learner(), seed=7) == kfold_cv(ds, 4, ols_learner(), seed=7)

    def test_mean_is_mean_of_folds(self, rng):
        res = kfold_cv(_random_ds(rng, 23, 2), 5, ols_learner())
        assert res.mean_error == pytest.approx(np.mean(res.fold_errors), rel=1e-15)

    def test_no_test_row_reaches_learner(self, rng):
        ds = _random_ds(rng, 17, 2)
        seen = []

        def audit(X, y):
            seen.append({tuple(r) for r in X})
            return ols_learner()(X, y)

        res = kfold_cv(ds, 4, audit, seed=3)
        for train_rows, fold in zip(seen, res.folds):
            assert not train_rows & {tuple(ds.X[i]) for i in fold}

    def test_failure_tagged_with_fold(self, rng):
        calls = []

        def flaky(X, y):
            calls.append(1)
            if len(calls) == 3:
                raise RuntimeError("boom")
            return zero_learner(X, y)

        with pytest.raises(FoldError, match="fold 2") as info:
            kfold_cv(_random_ds(rng, 10, 1), 5, flaky)
        assert info.value.fold == 2


class TestLoocv:
    def test_two_point_mean(self):
        res = loocv(Dataset(np.zeros((2, 1)), [1.0, 3.0]), mean_learner)
        assert res.fold_errors == (4.0, 4.0) and res.mean_error == 4.0

    def test_constant_labels_interpolating_learner(self):
        res = loocv(Dataset(np.zeros((6, 1)), np.full(6, 2.5)), mean_learner)
        assert res.mean_error == 0.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            loocv(Dataset(np.zeros((1, 1)), [1.0]), mean_learner)


class TestShortcut:
    def test_mean_smoother_two_points(self):
        res = loocv_shortcut(mean_smoother(2), [1.0, 3.0])
        np.testing.assert_allclose(res.residuals, [-2.0, 2.0])
        assert res.sse == pytest.approx(8.0)

    def test_identity_rejected_with_index(self):
        with pytest.raises(UndefinedLOOCVError, match="index 0"):
            loocv_shortcut(identity_smoother(3), [1.0, 2.0, 3.0])

    def test_ols_matches_brute_force(self, rng):
        ds = _random_ds(rng, 20, 3)
        sse = loocv_shortcut(ols_hat(ds.X), ds.y).sse
        brute = loocv(ds, ols_learner()).mean_error * ds.N
        assert abs(sse - brute) <= 1e-8 * brute

    def test_ols_with_intercept_matches(self, rng):
        ds = _random_ds(rng, 15, 2)
        sse = loocv_shortcut(ols_hat(add_intercept(ds.X)), ds.y).sse
        brute = loocv(ds, ols_learner(fit_intercept=True)).mean_error * ds.N
        assert abs(sse - brute) <= 1e-8 * brute

    @pytest.mark.parametrize("n", [5, 9, 40])
    def test_mean_matches_brute_force(self, rng, n):
        ds = _random_ds(rng, n, 1)
        sse = loocv_shortcut(mean_smoother(n), ds.y).sse
        assert sse == pytest.approx(loocv(ds, mean_learner).mean_error * n, rel=1e-8)

    def test_ridge_matches_definitional_loo_prediction(self, rng):
        # y_hat^(-i) solves y_hat^(-i) = sum_{j != i} g_ij y_j + g_ii y_hat^(-i)
        ds = _random_ds(rng, 14, 3)
        s = ridge_hat(ds.X, 2.0)
        g = s.gamma
        off = g @ ds.y - np.diag(g) * ds.y
        loo_pred = off / (1 - np.diag(g))
        np.testing.assert_allclose(loocv_shortcut(s, ds.y).residuals, ds.y - loo_pred,
                                   rtol=1e-10)

    def test_ridge_matches_refit(self, rng):
        # every column penalized: ridge is OLS on augmented rows, so the
        # leave-one-out identity holds for refits too
        ds = _random_ds(rng, 14, 3)
        sse = loocv_shortcut(ridge_hat(ds.X, 2.0), ds.y).sse
        brute = loocv(ds, ridge_learner(2.0)).mean_error * ds.N
        assert abs(sse - brute) <= 1e-8 * brute


class TestGcv:
    def test_equals_shortcut_for_mean_smoother(self, rng):
        y = rng.standard_normal(7)
        assert gcv(mean_smoother(7), y) == pytest.approx(loocv_shortcut(mean_smoother(7), y).sse,
                                                          rel=1e-12)

    def test_identity_rejected(self):
        with pytest.raises(UndefinedLOOCVError):
            gcv(identity_smoother(3), [1.0, 2.0, 3.0])

    def test_ridge_large_alpha_limit(self, rng):
        ds = _random_ds(rng, 25, 3)
        s = ridge_hat(ds.X, 1e6)
        g = gcv(s, ds.y)
        rss = float(np.sum((ds.y - predict(s, ds.y)) ** 2))
        assert np.isfinite(g) and g >= 0
        assert g == pytest.approx(rss, rel=1e-4)
        assert g == pytest.approx(float(ds.y @ ds.y), rel=1e-4)

    def test_formula(self, rng):
        ds = _random_ds(rng, 10, 2)
        s = ols_hat(ds.X)
        res = (ds.y - predict(s, ds.y)) / (1 - 2 / 10)
        assert gcv(s, ds.y) == pytest.approx(float(res @ res), rel=1e-12)


class TestTuning:
    @pytest.fixture
    def setup(self):
        spec = SyntheticSpec("linear", coefficients=(0,) + (1.0,) * 8,
                             domain=((0, 1),) * 8, noise_sigma=2.0)
        ds = generate_synthetic(spec, 24, seed=5)
        return ds, Split(range(12), range(12, 18), range(18, 24))

    def test_single_value(self, setup):
        ds, split = setup
        assert tune_with_validation([0.3], ridge_learner, split, ds).best_param == 0.3

    def test_argmin_of_validation_errors(self, setup):
        ds, split = setup
        res = tune_with_validation([0.0, 1e3], ridge_learner, split, ds)
        assert res.best_param == [0.0, 1e3][int(np.argmin(res.val_errors))]

    def test_ties_go_to_first(self, setup):
        ds, split = setup
        res = tune_with_validation(["a", "b"], lambda _: zero_learner, split, ds)
        assert res.best_param == "a"

    def test_test_rows_never_seen(self, setup):
        ds, split = setup
        test_rows = {tuple(ds.X[i]) for i in split.test_idx}

        def factory(alpha):
            def learn(X, y):
                assert not {tuple(r) for r in X} & test_rows
                return ridge_learner(alpha)(X, y)
            return learn

        tune_with_validation([0.1, 1.0, 10.0], factory, split, ds)

    def test_errors(self, setup):
        ds, split = setup
        with pytest.raises(ValueError):
            tune_with_validation([], ridge_learner, split, ds)
        with pytest.raises(ValueError):
            tune_with_validation([1.0], ridge_learner, Split(range(12), range(12, 24)), ds)


class TestStoppingMonitor:
    def _run(self, history, patience):
        m, stops = StoppingMonitor(patience), []
        for v in history:
            m, stop = monitor_step(m, v)
            stops.append(stop)
        return m, stops

    def test_decreasing_never_stops(self):
        _, stops = self._run([5, 4, 3, 2, 1, 0.5], 1)
        assert not any(stops)

    def test_patience_two(self):
        m, stops = self._run([1.0, 0.5, 0.6, 0.7], 2)
        assert stops == [False, False, False, True]
        assert m.best_index == 1 and m.best_value == 0.5

    def test_new_minimum_resets(self):
        _, stops = self._run([1.0, 1.1, 0.9, 1.0], 2)
        assert stops == [False, False, False, False]

    def test_equal_value_does_not_reset(self):
        m, stops = self._run([1.0, 1.0, 1.0], 2)
        assert stops[-1] and m.best_index == 0

    def test_patience_validated(self):
        with pytest.raises(ValueError):
            StoppingMonitor(0)
