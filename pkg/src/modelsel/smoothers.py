"""Linear smoothers y_hat = Gamma @ y with explicit (dense) hat matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

COND_LIMIT = 1e12


class SingularDesignError(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(
            f"X^T X is singular or near-singular (condition estimate {cond:.3e} "
            f"> {COND_LIMIT:.0e})"
        )


def gram_solve(X: np.ndarray, B: np.ndarray, alpha: float = 0.0) -> np.ndarray:
    """Solve (X^T X + alpha I) Z = B, refusing ill-conditioned systems."""
    X = np.asarray(X, dtype=float)
    G = X.T @ X
    if alpha:
        G = G + alpha * np.eye(G.shape[0])
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularDesignError(float(cond))
    return np.linalg.solve(G, B)


@dataclass(frozen=True)
class LinearSmoother:
    gamma: np.ndarray
    kind: str = "custom"
    alpha: Optional[float] = None
    design_dim: Optional[int] = None

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"hat matrix must be square, got shape {g.shape}")
        object.__setattr__(self, "gamma", g)

    @property
    def N(self) -> int:
        return self.gamma.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.gamma)


def ols_hat(X: np.ndarray) -> LinearSmoother:
    """Projection X (X^T X)^{-1} X^T onto the column space of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    gamma = X @ gram_solve(X, X.T)
    return LinearSmoother(gamma, "ols", None, X.shape[1])


def ridge_hat(X: np.ndarray, alpha: float) -> LinearSmoother:
    """X (X^T X + alpha I)^{-1} X^T. Every column of X is penalized."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    gamma = X @ gram_solve(X, X.T, alpha)
    return LinearSmoother(gamma, "ridge", float(alpha), X.shape[1])


def mean_smoother(n: int) -> LinearSmoother:
    return LinearSmoother(np.full((n, n), 1.0 / n), "mean", None, 1)


def identity_smoother(n: int) -> LinearSmoother:
    return LinearSmoother(np.eye(n), "custom")


def effective_dof(s: LinearSmoother) -> float:
    """Trace of the hat matrix."""
    return float(np.trace(s.gamma))


def predict(s: LinearSmoother, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[0] != s.N:
        raise ValueError(f"y has length {y.shape[0]}, smoother expects {s.N}")
    return s.gamma @ y
