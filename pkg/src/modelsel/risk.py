"""Bias, variance and MSE; SURE and hold-out estimates of true error.

Error sums here follow the convention err = sum_i (f_hat_i - y_i)^2 (a sum,
not a mean), so that the noise correction is n * sigma^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import MixtureSpec, bootstrap_sample, generate_mixture


@dataclass(frozen=True)
class MomentReport:
    variance: float
    bias: float
    mse: float


def moment_report(estimates: Sequence[float], true_value: float) -> MomentReport:
    """Population-normalized variance, bias and MSE of repeated estimates.

    All three use divide-by-count, so mse == variance + bias**2 up to rounding.
    """
    est = np.asarray(estimates, dtype=float).ravel()
    if est.size < 2:
        raise ValueError("moment_report needs at least 2 estimates")
    mean = est.mean()
    variance = float(np.mean((est - mean) ** 2))
    bias = float(mean - true_value)
    mse = float(np.mean((est - true_value) ** 2))
    return MomentReport(variance, bias, mse)


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float
    provenance: str = "given"

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError("sigma2 must be >= 0")
        if self.provenance not in ("given", "estimated"):
            raise ValueError("provenance is 'given' or 'estimated'")


def estimate_noise_variance(y, fitted) -> NoiseModel:
    """sigma^2 ~ sum (y_i - f_hat_i)^2 / (n - 1).

    Meant for fitted values from a rigid (high-bias, low-variance) model such
    as a straight line, so the estimate does not track model complexity.
    """
    y = np.asarray(y, dtype=float).ravel()
    f = np.asarray(fitted, dtype=float).ravel()
    if y.shape != f.shape:
        raise ValueError(f"length mismatch: {y.size} observations, {f.size} fitted")
    n = y.size
    if n < 2:
        raise ValueError("need n >= 2 to estimate the noise variance")
    return NoiseModel(float(np.sum((y - f) ** 2) / (n - 1)), "estimated")


def sure_err(err: float, n: int, sigma2: float, df: float) -> float:
    """Stein's unbiased estimate of true error for training instances."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    return err - n * sigma2 + 2.0 * sigma2 * df


def test_err(err_test: float, m: int, sigma2: float) -> float:
    """True-error estimate from m held-out instances: err - m * sigma^2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return err_test - m * sigma2


# keep pytest from collecting the estimator above as a test
test_err.__test__ = False


@dataclass(frozen=True)
class RiskReport:
    err: float
    Err: float
    n_or_m: int
    sigma2: float
    complexity: float = 0.0

    @classmethod
    def training(cls, err: float, n: int, sigma2: float, df: float) -> "RiskReport":
        return cls(err, sure_err(err, n, sigma2, df), n, sigma2, df)

    @classmethod
    def held_out(cls, err: float, m: int, sigma2: float) -> "RiskReport":
        return cls(err, test_err(err, m, sigma2), m, sigma2, 0.0)


# ---------------------------------------------------------------------------
# Stein's lemma
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteinFunction:
    name: str
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]


_EXP_SCALE = 0.5

STEIN_FUNCTIONS = {
    "identity": SteinFunction("identity", lambda z: z, np.ones_like),
    "square": SteinFunction("square", lambda z: z ** 2, lambda z: 2 * z),
    "cube": SteinFunction("cube", lambda z: z ** 3, lambda z: 3 * z ** 2),
    "sine": SteinFunction("sine", np.sin, np.cos),
    "exp": SteinFunction(
        "exp",
        lambda z: np.exp(_EXP_SCALE * z),
        lambda z: _EXP_SCALE * np.exp(_EXP_SCALE * z),
    ),
}

# exp(c z) has variance growing like exp(4 c^2 sigma^2); sigma is clipped for
# that entry so the Monte-Carlo error stays usable
EXP_SIGMA_CLIP = 2.0


@dataclass(frozen=True)
class SteinCheck:
    lhs: float
    rhs: float
    abs_diff: float
    std_error: float


def stein_lemma_check(g, mu: float, sigma: float, reps: int = 100_000,
                      seed: int = 42) -> SteinCheck:
    """Monte-Carlo check of E[(z - mu) g(z)] = sigma^2 E[g'(z)], z ~ N(mu, sigma^2).

    ``g`` is a registered name or a SteinFunction. Both sides use the same
    draws; ``std_error`` is the standard error of their paired difference.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if reps < 1000:
        raise ValueError("reps must be >= 1000")
    fn = STEIN_FUNCTIONS[g] if isinstance(g, str) else g
    if fn.name == "exp":
        sigma = min(sigma, EXP_SIGMA_CLIP)
    rng = np.random.default_rng(seed)
    z = mu + sigma * rng.standard_normal(reps)
    left = (z - mu) * fn.g(z)
    right = sigma ** 2 * fn.dg(z)
    lhs, rhs = float(left.mean()), float(right.mean())
    se = float((left - right).std(ddof=1) / math.sqrt(reps))
    return SteinCheck(lhs, rhs, abs(lhs - rhs), se)


# ---------------------------------------------------------------------------
# Ensemble bias / variance for classifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleBiasVariance:
    bias: float
    variance: float
    pe_bayes: float
    pe_main: float
    pe_mean: float


def _vote(preds: np.ndarray) -> np.ndarray:
    return np.where(preds.mean(axis=0) >= 0, 1.0, -1.0)


def ensemble_bias_variance(spec, learner: Callable, k: int, reps: int = 20,
                           n_train: int = 100, n_test: int = 10_000,
                           seed: int = 42) -> EnsembleBiasVariance:
    """Classification bias and variance of a k-member bagged learner.

    Each repetition draws a fresh training set and fits a bagged model (k
    members on bootstrap samples, majority vote). The main prediction is the
    majority vote of those per-repetition models. With prediction error PE
    measured on one large fresh test sample:

        bias     = PE(main) - PE(Bayes)
        variance = mean_r PE(model_r) - PE(main)

    ``learner(X, y)`` must return a callable mapping features to ±1 labels.
    """
    if not isinstance(spec, MixtureSpec):
        raise TypeError("ensemble_bias_variance needs a classification generator")
    if k < 1 or reps < 1:
        raise ValueError("k and reps must be >= 1")
    test = generate_mixture(spec, n_test, seed=seed)
    bayes = spec.bayes_predict(test.X)
    rep_preds = np.empty((reps, n_test))
    ss = np.random.SeedSequence(seed)
    for r, child in enumerate(ss.spawn(reps)):
        rep_seed = int(child.generate_state(1)[0])
        train = generate_mixture(spec, n_train, seed=rep_seed)
        member_preds = np.empty((k, n_test))
        for j in range(k):
            sample, _ = bootstrap_sample(train, seed=rep_seed + 1 + j)
            member_preds[j] = learner(sample.X, sample.y)(test.X)
        rep_preds[r] = _vote(member_preds)
    main = _vote(rep_preds)
    pe = lambda p: float(np.mean(p != test.y))
    pe_bayes, pe_main = pe(bayes), pe(main)
    pe_mean = float(np.mean([pe(p) for p in rep_preds]))
    return EnsembleBiasVariance(pe_main - pe_bayes, pe_mean - pe_main,
                                pe_bayes, pe_main, pe_mean)
