"""l2 / l1 regularization: ridge, lasso, and the local quadratic model.

The quadratic model J(x) ~ J(x*) + 1/2 (x - x*)^T H (x - x*) is the common
thread: ridge shrinks each eigendirection of H by lambda_j / (lambda_j + alpha),
lasso soft-thresholds coordinates, and gradient descent stopped after t steps
behaves like ridge with alpha ~ 1 / (t * eta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .smoothers import gram_solve


def add_intercept(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])


@dataclass(frozen=True)
class RegressionFit:
    beta: np.ndarray
    alpha: float
    kind: str
    fit_intercept: bool = False
    iterations: int = 0
    converged: bool = True
    objective_trace: tuple = ()

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if self.fit_intercept:
            return self.beta[0] + X @ self.beta[1:]
        return X @ self.beta


def _design(X, fit_intercept):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return add_intercept(X) if fit_intercept else X


def ols_solve(X, y, fit_intercept: bool = False) -> RegressionFit:
    """Least squares beta = (X^T X)^{-1} X^T y via a conditioned solve.

    With ``fit_intercept`` a column of ones is prepended and beta[0] is the
    intercept.
    """
    A = _design(X, fit_intercept)
    beta = gram_solve(A, A.T @ np.asarray(y, dtype=float))
    return RegressionFit(beta, 0.0, "ols", fit_intercept)


def ridge_solve(X, y, alpha: float, fit_intercept: bool = False) -> RegressionFit:
    """beta = (X^T X + alpha I)^{-1} X^T y.

    The penalty covers every design column, the intercept column included,
    so that the fitted values match ``ridge_hat`` on the same design.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    A = _design(X, fit_intercept)
    beta = gram_solve(A, A.T @ np.asarray(y, dtype=float), float(alpha))
    return RegressionFit(beta, float(alpha), "ridge", fit_intercept)


def soft_threshold(xj_star: float, alpha: float, hj: float) -> float:
    """Minimizer of 1/2 h (x - x*)^2 + alpha |x|: shrink x* toward 0 by alpha/h."""
    if hj <= 0 or alpha <= 0:
        raise ValueError("soft_threshold needs alpha > 0 and hj > 0")
    tau = alpha / hj
    if abs(xj_star) <= tau:
        return 0.0
    return float(xj_star - tau * np.sign(xj_star))


def _shrink(z: float, tau: float) -> float:
    # alpha = 0 is allowed inside coordinate descent (plain least squares)
    if z > tau:
        return z - tau
    if z < -tau:
        return z + tau
    return 0.0


def lasso_alpha_max(X, y, fit_intercept: bool = True, standardize: bool = True) -> float:
    """Smallest alpha at which every penalized coefficient is zero."""
    Z, r, _, _ = _lasso_prepare(X, y, fit_intercept, standardize)
    # column-by-column dot products match the first coordinate-descent sweep
    # bit for bit, so alpha_max itself yields exact zeros
    return float(max(abs(Z[:, j] @ r) for j in range(Z.shape[1])))


def _lasso_prepare(X, y, fit_intercept, standardize):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    x_mean = X.mean(axis=0) if fit_intercept else np.zeros(X.shape[1])
    y_mean = y.mean() if fit_intercept else 0.0
    Z = X - x_mean
    if standardize:
        scale = Z.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        scale = np.ones(X.shape[1])
    return Z / scale, y - y_mean, (x_mean, y_mean), scale


def lasso_cd(X, y, alpha: float, tol: float = 1e-8, max_iter: int = 10_000,
             fit_intercept: bool = True, standardize: bool = True) -> RegressionFit:
    """Cyclic coordinate descent on 1/2 ||y - X beta||^2 + alpha ||beta||_1.

    The intercept is handled by centering and is never penalized. With
    ``standardize`` the columns are scaled to unit (population) standard
    deviation before fitting; returned coefficients are on the original
    scale. The objective (in the working coordinates) is recorded after every
    full cycle. Hitting ``max_iter`` returns a fit flagged ``converged=False``.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    Z, yc, (x_mean, y_mean), scale = _lasso_prepare(X, y, fit_intercept, standardize)
    n, p = Z.shape
    col_sq = np.einsum("ij,ij->j", Z, Z)
    b = np.zeros(p)
    resid = yc.copy()

    def objective():
        return 0.5 * float(resid @ resid) + alpha * float(np.abs(b).sum())

    trace = [objective()]
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = b[j]
            rho = Z[:, j] @ resid + col_sq[j] * old
            new = _shrink(rho, alpha) / col_sq[j]
            if new != old:
                resid -= Z[:, j] * (new - old)
                b[j] = new
                max_delta = max(max_delta, abs(new - old))
        trace.append(objective())
        if max_delta < tol:
            converged = True
            break

    coef = b / scale
    if fit_intercept:
        beta = np.concatenate([[y_mean - x_mean @ coef], coef])
    else:
        beta = coef
    return RegressionFit(beta, float(alpha), "lasso", fit_intercept, it, converged,
                         tuple(trace))


# ---------------------------------------------------------------------------
# Quadratic surrogate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticObjective:
    """Minimizer x* and symmetric PSD Hessian H, with H = U diag(lam) U^T cached."""

    x_star: np.ndarray
    H: np.ndarray
    U: np.ndarray = field(init=False, repr=False)
    lam: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x_star, dtype=float).ravel()
        H = np.asarray(self.H, dtype=float)
        if H.shape != (x.size, x.size):
            raise ValueError("H must be d x d with d = len(x_star)")
        if not np.allclose(H, H.T, rtol=0, atol=1e-10 * max(1.0, np.abs(H).max())):
            raise ValueError("H must be symmetric")
        H = 0.5 * (H + H.T)
        lam, U = np.linalg.eigh(H)
        floor = 1e-10 * max(1.0, np.abs(lam).max())
        if lam.min() < -floor:
            raise ValueError(f"H is not PSD (min eigenvalue {lam.min():.3e})")
        lam = np.clip(lam, 0.0, None)
        object.__setattr__(self, "x_star", x)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "lam", lam)

    @property
    def d(self) -> int:
        return self.x_star.size


def quad_reg_minimizer(q: QuadraticObjective, alpha: float) -> np.ndarray:
    """Ridge-regularized minimizer U (Lambda + alpha I)^{-1} Lambda U^T x*."""
    if alpha == 0 and np.all(q.lam > 0):
        return q.x_star.copy()
    return q.U @ (shrinkage_factors(q, alpha) * (q.U.T @ q.x_star))


def quad_reg_minimizer_solve(q: QuadraticObjective, alpha: float) -> np.ndarray:
    """Same minimizer via (H + alpha I)^{-1} H x* (no eigendecomposition)."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return np.linalg.solve(q.H + alpha * np.eye(q.d), q.H @ q.x_star)


def shrinkage_factors(q: QuadraticObjective, alpha: float) -> np.ndarray:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    lam = q.lam
    if alpha == 0:
        # flat directions carry no curvature to keep; 0/0 is taken as 0
        return np.where(lam > 0, 1.0, 0.0)
    return lam / (lam + alpha)


def effective_params(q: QuadraticObjective, alpha: float) -> float:
    return float(shrinkage_factors(q, alpha).sum())


@dataclass(frozen=True)
class GDTrajectory:
    iterative: np.ndarray
    closed_form: np.ndarray
    divergent: bool


def gd_trajectory(q: QuadraticObjective, eta: float, t: int) -> GDTrajectory:
    """Gradient descent w <- w - eta H (w - x*) from w = 0, t steps.

    Returns both the literal iterate and the closed form
    U (I - (I - eta Lambda)^t) U^T x*. ``divergent`` flags eta * max(lam) >= 1.
    """
    if eta <= 0:
        raise ValueError("eta must be > 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    w = np.zeros(q.d)
    for _ in range(t):
        w = w - eta * (q.H @ (w - q.x_star))
    factors = 1.0 - (1.0 - eta * q.lam) ** t
    closed = q.U @ (factors * (q.U.T @ q.x_star))
    lam_max = float(q.lam.max()) if q.d else 0.0
    return GDTrajectory(w, closed, eta * lam_max >= 1.0)


def early_stop_equivalent_alpha(eta: float, t: int) -> float:
    """Ridge strength matched to t steps of gradient descent: 1 / (t * eta)."""
    if eta <= 0 or t < 1:
        raise ValueError("need eta > 0 and t >= 1")
    return 1.0 / (t * eta)


# ---------------------------------------------------------------------------
# Noise injection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseInjectionCheck:
    noisy_loss: float
    clean_loss_plus_penalty: float
    abs_diff: float
    std_error: float


def linear_gaussian_generator(v: np.ndarray, noise: float = 0.5) -> Callable:
    """x ~ N(0, I), y = v . x + N(0, noise^2)."""
    v = np.asarray(v, dtype=float)

    def gen(rng: np.random.Generator, n: int):
        X = rng.standard_normal((n, v.size))
        return X, X @ v + noise * rng.standard_normal(n)

    return gen


def noise_injection_check(w, generator: Optional[Callable] = None, sigma: float = 0.3,
                          reps: int = 100_000, seed: int = 42) -> NoiseInjectionCheck:
    """Compare E[(w.(x+eps) - y)^2] with E[(w.x - y)^2] + sigma^2 ||w||^2.

    For a linear model the Hessian term of the expansion vanishes and the
    identity is exact, so the gap is pure Monte-Carlo noise. Both sides share
    the same (x, y) draws; ``std_error`` is the standard error of the paired
    per-sample difference.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    w = np.asarray(w, dtype=float)
    if generator is None:
        generator = linear_gaussian_generator(np.ones(w.size))
    rng = np.random.default_rng(seed)
    X, y = generator(rng, reps)
    eps = sigma * rng.standard_normal(X.shape)
    clean_res = X @ w - y
    noisy_res = clean_res + eps @ w
    penalty = sigma ** 2 * float(w @ w)
    noisy = noisy_res ** 2
    clean = clean_res ** 2 + penalty
    diff = noisy - clean
    se = float(diff.std(ddof=1) / np.sqrt(reps)) if reps > 1 else float("inf")
    nl, cl = float(noisy.mean()), float(clean.mean())
    return NoiseInjectionCheck(nl, cl, abs(nl - cl), se)
