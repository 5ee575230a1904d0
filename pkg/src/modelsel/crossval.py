"""K-fold and leave-one-out cross validation, the closed-form LOOCV
shortcut for linear smoothers, GCV, validation-set tuning and early stopping.

A *learner* is ``learner(X_train, y_train) -> predict`` where
``predict(X) -> y_hat``. Per-fold errors are mean squared errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset, Split, kfold_partitions
from .regularize import ols_solve, ridge_solve
from .smoothers import LinearSmoother, effective_dof, predict

INTERP_TOL = 1e-10


class FoldError(RuntimeError):
    def __init__(self, fold: int, cause: BaseException):
        self.fold = fold
        super().__init__(f"learner failed on fold {fold}: {cause}")


class UndefinedLOOCVError(ValueError):
    pass


@dataclass(frozen=True)
class CvResult:
    fold_errors: tuple
    mean_error: float
    K: int
    folds: tuple = field(default=(), repr=False)


def mse(y, y_hat) -> float:
    y, y_hat = np.asarray(y, float), np.asarray(y_hat, float)
    return float(np.mean((y - y_hat) ** 2))


# -- stock learners ---------------------------------------------------------

def ols_learner(fit_intercept: bool = False) -> Callable:
    def learn(X, y):
        return ols_solve(X, y, fit_intercept).predict
    return learn


def ridge_learner(alpha: float, fit_intercept: bool = False) -> Callable:
    def learn(X, y):
        return ridge_solve(X, y, alpha, fit_intercept).predict
    return learn


def mean_learner(X, y):
    m = float(np.mean(y))
    return lambda Xq: np.full(np.asarray(Xq).shape[0], m)


def zero_learner(X, y):
    return lambda Xq: np.zeros(np.asarray(Xq).shape[0])


# -- cross validation -------------------------------------------------------

def _run_folds(ds: Dataset, folds, learner, loss) -> CvResult:
    all_idx = np.arange(ds.N)
    errors = []
    for k, test_idx in enumerate(folds):
        test_idx = np.asarray(test_idx, dtype=int)
        train_idx = np.setdiff1d(all_idx, test_idx)
        try:
            model = learner(ds.X[train_idx], ds.y[train_idx])
            y_hat = model(ds.X[test_idx])
        except Exception as exc:
            raise FoldError(k, exc) from exc
        errors.append(float(loss(ds.y[test_idx], y_hat)))
    # fsum makes the mean independent of fold order
    return CvResult(tuple(errors), math.fsum(errors) / len(errors), len(folds),
                    tuple(tuple(f) for f in folds))


def kfold_cv(ds: Dataset, K: int, learner: Callable, loss: Callable = mse,
             seed: int = 42) -> CvResult:
    folds = kfold_partitions(ds, K, seed)
    return _run_folds(ds, folds, learner, loss)


def loocv(ds: Dataset, learner: Callable, loss: Callable = mse) -> CvResult:
    if ds.N < 2:
        raise ValueError("LOOCV needs N >= 2")
    return _run_folds(ds, [[i] for i in range(ds.N)], learner, loss)


@dataclass(frozen=True)
class ShortcutResult:
    residuals: np.ndarray
    sse: float


def loocv_shortcut(s: LinearSmoother, y) -> ShortcutResult:
    """Leave-one-out residuals (y_i - y_hat_i) / (1 - gamma_ii) from one fit."""
    y = np.asarray(y, dtype=float)
    y_hat = predict(s, y)
    denom = 1.0 - s.diag
    bad = np.flatnonzero(np.abs(denom) <= INTERP_TOL)
    if bad.size:
        raise UndefinedLOOCVError(
            f"interpolating smoother; LOOCV undefined (gamma_ii = 1 at index {int(bad[0])})"
        )
    res = (y - y_hat) / denom
    return ShortcutResult(res, float(res @ res))


def gcv(s: LinearSmoother, y) -> float:
    """Generalized CV: the shortcut with every gamma_ii replaced by tr(Gamma)/N."""
    y = np.asarray(y, dtype=float)
    ratio = effective_dof(s) / s.N
    if abs(1.0 - ratio) <= INTERP_TOL:
        raise UndefinedLOOCVError("GCV undefined: tr(Gamma) / N = 1")
    res = (y - predict(s, y)) / (1.0 - ratio)
    return float(res @ res)


# -- validation-set tuning --------------------------------------------------

@dataclass(frozen=True)
class TuneResult:
    best_param: object
    val_errors: tuple


def tune_with_validation(grid: Sequence, learner_factory: Callable, split: Split,
                         ds: Dataset, loss: Callable = mse) -> TuneResult:
    """Fit on the training part for each grid value, score on validation.

    Only ``train_idx`` and ``val_idx`` rows are ever handed to the learner;
    the test part is left untouched. Ties go to the earliest grid entry.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty parameter grid")
    if not split.val_idx:
        raise ValueError("split has no validation set")
    split.check(ds.N)
    tr = np.asarray(split.train_idx, dtype=int)
    va = np.asarray(split.val_idx, dtype=int)
    errors = []
    for param in grid:
        model = learner_factory(param)(ds.X[tr], ds.y[tr])
        errors.append(float(loss(ds.y[va], model(ds.X[va]))))
    best = int(np.argmin(errors))  # first minimum
    return TuneResult(grid[best], tuple(errors))


# -- early stopping ---------------------------------------------------------

@dataclass(frozen=True)
class StoppingMonitor:
    patience: int = 5
    history: tuple = ()
    best_index: int = -1
    best_value: float = math.inf

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


def monitor_step(m: StoppingMonitor, new_val_error: float):
    """Append a validation error; stop once ``patience`` entries pass without
    a new strict minimum. Returns ``(monitor, should_stop)``."""
    history = m.history + (float(new_val_error),)
    best_index, best_value = m.best_index, m.best_value
    if new_val_error < best_value:
        best_index, best_value = len(history) - 1, float(new_val_error)
    updated = StoppingMonitor(m.patience, history, best_index, best_value)
    return updated, (len(history) - 1 - best_index) >= m.patience
