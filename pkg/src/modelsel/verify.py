"""Desk-scale oracle checks behind ``modelsel verify``.

Each check compares a library routine against an independent oracle
(brute force, Monte Carlo, grid search or a known closed form) and reports
the worst measured discrepancy next to its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import crossval, ensemble, regularize, risk, smoothers
from .dataset import Dataset, MixtureSpec, generate_mixture


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    suite: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status} [{self.number:2d}] {self.suite}/{self.name}: "
                f"measured={self.measured:.6g} tolerance={self.tolerance:.6g}")
        return text + (f" ({self.detail})" if self.detail else "")


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def hadamard(n: int) -> np.ndarray:
    """Sylvester Hadamard matrix; n must be a power of two."""
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


# -- crossval -----------------------------------------------------------------

def check_loocv_shortcut(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(5, 41))
        d = int(rng.integers(1, min(5, n - 2) + 1))
        X = rng.standard_normal((n, d))
        y = X @ rng.standard_normal(d) + rng.standard_normal(n)
        fast = crossval.loocv_shortcut(smoothers.ols_hat(X), y)
        slow = crossval.loocv(Dataset(X, y), crossval.ols_learner())
        worst = max(worst, abs(fast.sse - slow.mean_error * n) / (slow.mean_error * n))
    return CheckResult(1, "loocv_shortcut", "crossval", worst <= 1e-8, worst, 1e-8,
                       "50 OLS datasets, relative SSE gap")


def check_gcv_constant_diagonal(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    cases = []
    for n in range(3, 10):
        cases.append(smoothers.mean_smoother(n))
    for n in (4, 8, 16, 32):
        H = hadamard(n)
        for p in (1, 2, 3):
            cases.append(smoothers.ols_hat(H[:, :p]))
    for n, p, a in ((8, 2, 0.5), (16, 3, 2.0)):
        cases.append(smoothers.ridge_hat(hadamard(n)[:, :p], a))
    worst = 0.0
    for s in cases:
        y = rng.standard_normal(s.N)
        g = crossval.gcv(s, y)
        sse = crossval.loocv_shortcut(s, y).sse
        worst = max(worst, abs(g - sse) / max(1.0, abs(sse)))
    return CheckResult(2, "gcv_constant_diagonal", "crossval", worst <= 1e-12, worst, 1e-12,
                       f"{len(cases)} constant-diagonal smoothers")


# -- risk ---------------------------------------------------------------------

def check_sure_unbiased(seed: int = 42, redraws: int = 2000) -> CheckResult:
    rng = np.random.default_rng(seed)
    n, sigma = 40, 0.5
    x = np.sort(rng.random(n))
    X = np.vander(2 * x - 1, 4, increasing=True)
    s = smoothers.ols_hat(X)
    f = np.sin(2 * np.pi * x)
    df = smoothers.effective_dof(s)
    diffs = np.empty(redraws)
    for r in range(redraws):
        y = f + sigma * rng.standard_normal(n)
        fit = smoothers.predict(s, y)
        err = float(np.sum((fit - y) ** 2))
        diffs[r] = risk.sure_err(err, n, sigma ** 2, df) - float(np.sum((fit - f) ** 2))
    se = diffs.std(ddof=1) / math.sqrt(redraws)
    z = abs(diffs.mean()) / se
    return CheckResult(3, "sure_unbiased", "risk", z <= 4.0, z, 4.0,
                       "|mean(SURE - true error)| in standard errors")


def check_stein_lemma(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    pairs = [(float(rng.uniform(-2, 2)), float(rng.uniform(0.2, 2.5))) for _ in range(20)]
    worst = 0.0
    for i, name in enumerate(risk.STEIN_FUNCTIONS):
        for j, (mu, sig) in enumerate(pairs):
            c = risk.stein_lemma_check(name, mu, sig, reps=100_000, seed=seed + 100 * i + j)
            worst = max(worst, c.abs_diff / c.std_error)
    return CheckResult(4, "stein_lemma", "risk", worst <= 4.0, worst, 4.0,
                       "worst |lhs - rhs| in standard errors, 100 cases")


# -- regularize ---------------------------------------------------------------

def _random_psd(rng, d):
    A = rng.standard_normal((d + 3, d))
    return A.T @ A / (d + 3)


def check_ridge_routes(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_route = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 9))
        q = regularize.QuadraticObjective(rng.standard_normal(d), _random_psd(rng, d))
        alpha = float(10 ** rng.uniform(-2, 1))
        a = regularize.quad_reg_minimizer(q, alpha)
        b = regularize.quad_reg_minimizer_solve(q, alpha)
        worst_route = max(worst_route, _rel(a, b))
    worst_trace = 0.0
    for _ in range(20):
        n, p = int(rng.integers(10, 40)), int(rng.integers(1, 7))
        X = rng.standard_normal((n, p))
        alpha = float(10 ** rng.uniform(-2, 1))
        q = regularize.QuadraticObjective(np.zeros(p), X.T @ X)
        t = smoothers.effective_dof(smoothers.ridge_hat(X, alpha))
        worst_trace = max(worst_trace, abs(regularize.effective_params(q, alpha) - t))
    ok = worst_route <= 1e-10 and worst_trace <= 1e-8
    return CheckResult(5, "ridge_routes", "regularize", ok, worst_route, 1e-10,
                       f"effective-params gap {worst_trace:.3g} (tol 1e-08)")


def check_soft_threshold(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    dead_zone_ok = True
    for _ in range(100):
        xs, alpha, h = rng.uniform(-3, 3), rng.uniform(0.05, 2), rng.uniform(0.2, 3)
        grid = np.linspace(-4.0, 4.0, 160_001)  # step 5e-5
        obj = 0.5 * h * (grid - xs) ** 2 + alpha * np.abs(grid)
        worst = max(worst, abs(regularize.soft_threshold(xs, alpha, h) - grid[np.argmin(obj)]))
        edge = alpha / h * rng.uniform(-1, 1)
        dead_zone_ok &= regularize.soft_threshold(edge, alpha, h) == 0.0
        dead_zone_ok &= regularize.soft_threshold(alpha / h, alpha, h) == 0.0
    ok = worst <= 1e-3 and dead_zone_ok
    return CheckResult(6, "soft_threshold", "regularize", ok, worst, 1e-3,
                       "dead zone exact" if dead_zone_ok else "dead zone violated")


def check_lasso(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    monotone = True
    zero_ok = True
    for _ in range(10):
        n, p = int(rng.integers(8, 30)), int(rng.integers(1, 6))
        Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
        y = Q @ rng.standard_normal(p) * 2 + 0.3 * rng.standard_normal(n)
        alpha = float(rng.uniform(0.05, 1.0))
        fit = regularize.lasso_cd(Q, y, alpha, tol=1e-12, fit_intercept=False,
                                  standardize=False)
        oracle = [regularize._shrink(v, alpha) for v in Q.T @ y]
        worst = max(worst, float(np.max(np.abs(fit.beta - oracle))))
        X = rng.standard_normal((n, p))
        yy = X @ rng.standard_normal(p) + rng.standard_normal(n)
        amax = regularize.lasso_alpha_max(X, yy)
        above = regularize.lasso_cd(X, yy, amax * 1.01)
        zero_ok &= bool(np.all(above.beta[1:] == 0.0))
        for fit_ in (fit, above, regularize.lasso_cd(X, yy, 0.1 * amax)):
            tr = np.asarray(fit_.objective_trace)
            monotone &= bool(np.all(np.diff(tr) <= 1e-12 * np.abs(tr[:-1])))
    ok = worst <= 1e-8 and monotone and zero_ok
    return CheckResult(7, "lasso", "regularize", ok, worst, 1e-8,
                       f"zero above alpha_max: {zero_ok}; monotone objective: {monotone}")


def check_early_stopping(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_closed = 0.0
    per_t = {10: 0.0, 100: 0.0, 1000: 0.0}
    for _ in range(20):
        d = int(rng.integers(2, 7))
        q = regularize.QuadraticObjective(rng.standard_normal(d), _random_psd(rng, d))
        eta = 0.01 / q.lam.max()
        for t in per_t:
            gd = regularize.gd_trajectory(q, eta, t)
            ridge = regularize.quad_reg_minimizer(q, regularize.early_stop_equivalent_alpha(eta, t))
            dist = float(np.linalg.norm(gd.closed_form - ridge) / np.linalg.norm(q.x_star))
            per_t[t] = max(per_t[t], dist)
            worst_closed = max(worst_closed, _rel(gd.closed_form, gd.iterative))
    worst = max(per_t.values())
    ok = worst <= 0.05 and worst_closed <= 1e-9
    detail = ", ".join(f"t={t}: {v:.3g}" for t, v in per_t.items())
    return CheckResult(8, "early_stopping", "regularize", ok, worst, 0.05,
                       f"{detail}; closed form vs iteration {worst_closed:.3g} (tol 1e-09)")


def check_noise_injection(seed: int = 42) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(10):
        d = int(rng.integers(1, 6))
        w = rng.standard_normal(d)
        gen = regularize.linear_gaussian_generator(rng.standard_normal(d))
        c = regularize.noise_injection_check(w, gen, sigma=float(rng.uniform(0.1, 1.0)),
                                             reps=100_000, seed=seed + i)
        worst = max(worst, c.abs_diff / c.std_error)
    return CheckResult(9, "noise_injection", "regularize", worst <= 4.0, worst, 4.0,
                       "worst gap in standard errors, 10 weight vectors")


# -- ensemble -----------------------------------------------------------------

BAGGING_GRID = tuple(
    (s, c, k)
    for s, c in ((1.0, 0.0), (1.0, 0.5), (2.0, -0.1), (0.5, 0.5))
    for k in (1, 5, 20)
)


def check_bagging_variance(seed: int = 42) -> CheckResult:
    worst = 0.0
    never_worse = True
    for i, (s, c, k) in enumerate(BAGGING_GRID):
        r = ensemble.bagging_variance_mc(s, c, k, reps=100_000, seed=seed + i)
        worst = max(worst, abs(r.empirical_var - r.theory_var) / r.std_error)
        never_worse &= r.empirical_var <= s + 4 * r.std_error
    ok = worst <= 4.0 and never_worse
    return CheckResult(10, "bagging_variance", "ensemble", ok, worst, 4.0,
                       f"{len(BAGGING_GRID)}-point grid; never above s: {never_worse}")


def check_adaboost_bounds(seed: int = 42) -> CheckResult:
    worst_train = -math.inf
    worst_margin = -math.inf
    for r in range(20):
        ds = generate_mixture(MixtureSpec(), 200, seed=seed + r)
        m = ensemble.adaboost_train(ds, 50, alpha_convention="halved")
        train_error = float(np.mean(ensemble.adaboost_predict(m, ds.X) != ds.y))
        worst_train = max(worst_train, train_error - ensemble.training_error_bound(m.losses))
        marg = ensemble.margins(m, ds)
        for theta in (0.01, 0.05, 0.1):
            gap = float(np.mean(marg <= theta)) - ensemble.generalization_bound(m, theta)
            worst_margin = max(worst_margin, gap)
    ok = worst_train <= 0 and worst_margin <= 0
    return CheckResult(11, "adaboost_bounds", "ensemble", ok, max(worst_train, worst_margin),
                       0.0, f"training gap {worst_train:.3g}, margin gap {worst_margin:.3g}")


def check_stagewise(seed: int = 42) -> CheckResult:
    worst = 0.0
    same_stumps = True
    for r in range(10):
        ds = generate_mixture(MixtureSpec(), 100, seed=seed + 1000 + r)
        ada = ensemble.adaboost_train(ds, 20, alpha_convention="algorithm3")
        stage = ensemble.stagewise_additive_fit(ds, 20)
        same_stumps &= ada.members == stage.members
        if ada.members == stage.members:
            worst = max(worst, _rel(ada.alphas, 2 * np.asarray(stage.alphas)))
    ok = same_stumps and worst <= 1e-6
    return CheckResult(12, "stagewise_equivalence", "ensemble", ok, worst, 1e-6,
                       f"same stump sequence: {same_stumps}")


CHECKS: dict = {
    1: ("crossval", check_loocv_shortcut),
    2: ("crossval", check_gcv_constant_diagonal),
    3: ("risk", check_sure_unbiased),
    4: ("risk", check_stein_lemma),
    5: ("regularize", check_ridge_routes),
    6: ("regularize", check_soft_threshold),
    7: ("regularize", check_lasso),
    8: ("regularize", check_early_stopping),
    9: ("regularize", check_noise_injection),
    10: ("ensemble", check_bagging_variance),
    11: ("ensemble", check_adaboost_bounds),
    12: ("ensemble", check_stagewise),
}

SUITES = ("risk", "crossval", "regularize", "ensemble")


def run_checks(suite: Optional[str] = None, seed: int = 42,
               report: Optional[Callable[[CheckResult], None]] = None) -> list:
    """Run every check (or one suite) in numeric order."""
    if suite is not None and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    results = []
    for number, (name, fn) in CHECKS.items():
        if suite is not None and name != suite:
            continue
        try:
            res = fn(seed)
        except Exception as exc:  # a crash is a failed check, not an abort
            res = CheckResult(number, fn.__name__.removeprefix("check_"), name, False,
                              math.nan, math.nan, f"error: {exc}")
        results.append(res)
        if report is not None:
            report(res)
    return results
