"""Bagging and binary AdaBoost with decision stumps.

Labels are ±1 and sign(0) is taken as +1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dataset import Dataset, bootstrap_sample

LOSS_CLAMP = 1e-12
TIE_TOL = 1e-12


def sign(v):
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# Decision stumps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stump:
    """Predicts ``polarity`` where x[feature] > threshold, else -polarity."""

    feature: int
    threshold: float
    polarity: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        return np.where(X[:, self.feature] > self.threshold,
                        float(self.polarity), -float(self.polarity))

    __call__ = predict


def _stump_candidates(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Weighted error of every (feature, midpoint threshold, polarity).

    Candidates come out ordered by feature, then threshold, then polarity
    (+1 before -1), which is the tie-breaking order.
    """
    feats, thrs, pols, errs = [], [], [], []
    pos_w = np.where(y > 0, w, 0.0)
    neg_w = np.where(y > 0, 0.0, w)
    w_pos, w_neg = pos_w.sum(), neg_w.sum()
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        last = np.flatnonzero(np.diff(xs) > 0)  # last index of each value group but the final one
        if last.size == 0:
            continue
        cpos = np.cumsum(pos_w[order])[last]
        cneg = np.cumsum(neg_w[order])[last]
        thr = 0.5 * (xs[last] + xs[last + 1])
        err_plus = cpos + (w_neg - cneg)   # +1 above threshold
        err_minus = cneg + (w_pos - cpos)  # -1 above threshold
        m = thr.size
        feats.append(np.full(2 * m, j))
        thrs.append(np.repeat(thr, 2))
        pols.append(np.tile([1, -1], m))
        errs.append(np.column_stack([err_plus, err_minus]).ravel())
    if not feats:
        # every feature constant: fall back to a constant classifier
        t = -math.inf
        return (np.array([0, 0]), np.array([t, t]), np.array([1, -1]),
                np.array([w_neg, w_pos]))
    return (np.concatenate(feats), np.concatenate(thrs),
            np.concatenate(pols), np.concatenate(errs))


def _first_min(values: np.ndarray) -> int:
    return int(np.flatnonzero(values <= values.min() + TIE_TOL)[0])


def fit_stump(X, y, weights=None):
    """Exhaustive weighted-error search. Returns ``(stump, weighted_error)``
    with the error normalized by the total weight."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    w = np.full(y.size, 1.0 / y.size) if weights is None else np.asarray(weights, float)
    w = w / w.sum()
    f, t, p, e = _stump_candidates(X, y, w)
    i = _first_min(e)
    return Stump(int(f[i]), float(t[i]), int(p[i])), float(e[i])


def stump_learner(X, y):
    return fit_stump(X, y)[0].predict


# ---------------------------------------------------------------------------
# Bagging
# ---------------------------------------------------------------------------

class MemberError(RuntimeError):
    def __init__(self, member: int, cause: BaseException):
        self.member = member
        super().__init__(f"base learner failed on bagging member {member}: {cause}")


@dataclass(frozen=True)
class BaggedModel:
    members: tuple  # (predict, feature_indices) pairs
    aggregation: str
    d: int

    def __post_init__(self):
        if not self.members:
            raise ValueError("a bagged model needs at least one member")
        if self.aggregation not in ("mean", "sign_of_mean"):
            raise ValueError("aggregation is 'mean' or 'sign_of_mean'")

    def member_outputs(self, X: np.ndarray) -> np.ndarray:
        return np.stack([np.asarray(pred(X[:, feats]), float)
                         for pred, feats in self.members])


def bag_train(ds: Dataset, k: int, learner: Callable, sample_size: Optional[int] = None,
              feature_fraction: float = 1.0, seed: int = 42,
              aggregation: str = "mean") -> BaggedModel:
    """Fit k members on independent bootstrap samples (member j uses seed (seed, j))."""
    if k < 1:
        raise ValueError("k must be >= 1")
    members = []
    for j in range(k):
        sample, feats = bootstrap_sample(ds, sample_size, feature_fraction, seed=(seed, j))
        try:
            members.append((learner(sample.X, sample.y), feats))
        except Exception as exc:
            raise MemberError(j, exc) from exc
    return BaggedModel(tuple(members), aggregation, ds.d)


def bag_predict(m: BaggedModel, x):
    """Average member outputs; ``sign_of_mean`` votes. A 1-D ``x`` gives a float."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != m.d:
        raise ValueError(f"expected {m.d} features, got {X.shape[1]}")
    out = m.member_outputs(X).mean(axis=0)
    if m.aggregation == "sign_of_mean":
        out = sign(out)
    return float(out[0]) if single else out


def bagging_variance_theory(s: float, c: float, k: int) -> float:
    """Variance of the mean of k estimates with variance s and covariance c."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if s < 0 or abs(c) > s:
        raise ValueError("need s >= 0 and |c| <= s")
    return s / k + (k - 1) / k * c


@dataclass(frozen=True)
class BaggingVarianceMC:
    empirical_var: float
    theory_var: float
    std_error: float


def bagging_variance_mc(s: float, c: float, k: int, reps: int = 100_000,
                        seed: int = 42) -> BaggingVarianceMC:
    """Average k jointly Gaussian errors (variance s, covariance c) and
    measure the variance of the average over ``reps`` draws."""
    if k < 1 or reps < 2:
        raise ValueError("need k >= 1 and reps >= 2")
    if s < 0 or abs(c) > s or (k > 1 and c < -s / (k - 1)):
        raise ValueError(f"covariance (s={s}, c={c}, k={k}) is not PSD")
    cov = np.full((k, k), float(c))
    np.fill_diagonal(cov, s)
    lam, V = np.linalg.eigh(cov)
    factor = V * np.sqrt(np.clip(lam, 0.0, None))
    rng = np.random.default_rng(seed)
    errors = rng.standard_normal((reps, k)) @ factor.T
    avg = errors.mean(axis=1)
    dev2 = (avg - avg.mean()) ** 2
    emp = float(dev2.sum() / (reps - 1))
    se = float(dev2.std(ddof=1) / math.sqrt(reps))
    return BaggingVarianceMC(emp, bagging_variance_theory(s, c, k), se)


# ---------------------------------------------------------------------------
# AdaBoost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostState:
    """Instance weights between rounds; a probability vector."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("boost weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class BoostModel:
    members: tuple
    alphas: tuple
    losses: tuple
    alpha_convention: str = "algorithm3"
    states: tuple = ()

    def __post_init__(self):
        if not len(self.members) == len(self.alphas) == len(self.losses):
            raise ValueError("members, alphas and losses must have equal length")
        if self.alpha_convention not in ("algorithm3", "halved"):
            raise ValueError("alpha_convention is 'algorithm3' or 'halved'")

    @property
    def k(self) -> int:
        return len(self.members)

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        total = np.zeros(X.shape[0])
        for a, h in zip(self.alphas, self.members):
            total += a * h.predict(X)
        return total

    def rescaled(self, factor: float) -> "BoostModel":
        return BoostModel(self.members, tuple(a * factor for a in self.alphas),
                          self.losses, self.alpha_convention, self.states)


def clamp_loss(L: float) -> float:
    return min(max(L, LOSS_CLAMP), 1.0 - LOSS_CLAMP)


def boost_alpha(L: float, convention: str = "algorithm3") -> float:
    """log((1 - L) / L), halved under the ``halved`` convention."""
    L = clamp_loss(L)
    a = math.log((1.0 - L) / L)
    return 0.5 * a if convention == "halved" else a


def update_weights(w: np.ndarray, miss: np.ndarray, L: float):
    """One AdaBoost reweighting: w_i * exp(log((1-L)/L) * [miss_i]).

    Correctly classified instances keep their weight before normalization.
    Returns ``(unnormalized, normalized)``.
    """
    raw = w * np.exp(boost_alpha(L, "algorithm3") * miss)
    return raw, raw / raw.sum()


def _check_binary(ds: Dataset, k: int):
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ds.is_classification:
        raise ValueError("AdaBoost needs labels in {-1, +1}")
    if np.unique(ds.y).size < 2:
        raise ValueError("AdaBoost needs both classes present")


def adaboost_train(ds: Dataset, k: int, alpha_convention: str = "algorithm3") -> BoostModel:
    """Binary AdaBoost over decision stumps.

    The weight update is the same under either alpha convention; the
    convention only rescales the stored alphas, which leaves predictions
    unchanged.
    """
    _check_binary(ds, k)
    X, y = ds.X, ds.y
    w = np.full(ds.N, 1.0 / ds.N)
    members, alphas, losses, states = [], [], [], [BoostState(w)]
    for _ in range(k):
        stump, L = fit_stump(X, y, w)
        L = clamp_loss(L)
        miss = (stump.predict(X) != y).astype(float)
        _, w = update_weights(w, miss, L)
        members.append(stump)
        alphas.append(boost_alpha(L, alpha_convention))
        losses.append(L)
        states.append(BoostState(w))
    return BoostModel(tuple(members), tuple(alphas), tuple(losses),
                      alpha_convention, tuple(states))


def adaboost_predict(m: BoostModel, x):
    """sign(sum_j alpha_j h_j(x)); a 1-D ``x`` gives a single label."""
    x = np.asarray(x, dtype=float)
    out = sign(m.scores(x))
    return float(out[0]) if x.ndim == 1 else out


def margins(m: BoostModel, ds: Dataset) -> np.ndarray:
    """y_i * sum_j alpha_j h_j(x_i) / sum_j alpha_j, in [-1, 1]."""
    total = float(np.sum(m.alphas))
    if total <= 0:
        raise ValueError("margins need a positive sum of alphas")
    return ds.y * m.scores(ds.X) / total


def training_error_bound(losses) -> float:
    """prod_j 2 sqrt(L_j (1 - L_j)), via logs."""
    L = np.array([clamp_loss(v) for v in losses])
    return float(np.exp(np.sum(np.log(2.0) + 0.5 * (np.log(L) + np.log1p(-L)))))


def _safe_exp(v: float) -> float:
    return math.exp(v) if v < 700 else math.inf


def generalization_bound(m: BoostModel, theta: float) -> float:
    """2^k prod_j sqrt(L_j^(1-theta) (1-L_j)^(1+theta)), via logs."""
    if m.alpha_convention != "halved":
        raise ValueError("generalization_bound expects a model with halved alphas")
    if theta <= 0:
        raise ValueError("theta must be > 0")
    L = np.array([clamp_loss(v) for v in m.losses])
    log_b = m.k * math.log(2.0) + 0.5 * float(
        np.sum((1 - theta) * np.log(L) + (1 + theta) * np.log1p(-L)))
    return _safe_exp(log_b)


def edge_bound(xi: float, theta: float, k: int) -> float:
    """((1-2 xi)^(1-theta) (1+2 xi)^(1+theta))^(k/2) for weak learners with edge xi."""
    if not 0.0 < xi < 0.5:
        raise ValueError("xi must lie in (0, 0.5)")
    if theta <= 0:
        raise ValueError("theta must be > 0")
    log_base = (1 - theta) * math.log1p(-2 * xi) + (1 + theta) * math.log1p(2 * xi)
    return _safe_exp(0.5 * k * log_base)


# ---------------------------------------------------------------------------
# Forward stagewise additive fitting under exponential loss
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(fun: Callable, lo, hi, tol: float = 1e-12, max_iter: int = 200):
    """Vectorized golden-section search; ``lo``/``hi`` may be arrays."""
    a = np.asarray(lo, dtype=float).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=float), a.shape).copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if np.all(b - a < tol):
            break
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        # reuse the surviving interior point
        new_c = b - _GOLDEN * (b - a)
        new_d = a + _GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        f_c_next = np.where(left, np.nan, fd)
        f_d_next = np.where(left, fc, np.nan)
        need_c, need_d = np.isnan(f_c_next), np.isnan(f_d_next)
        if need_c.any():
            f_c_next = np.where(need_c, fun(c_next), f_c_next)
        if need_d.any():
            f_d_next = np.where(need_d, fun(d_next), f_d_next)
        c, d, fc, fd = c_next, d_next, f_c_next, f_d_next
    return 0.5 * (a + b)


BETA_MAX = 0.5 * math.log((1.0 - LOSS_CLAMP) / LOSS_CLAMP)


def stagewise_additive_fit(ds: Dataset, k: int) -> BoostModel:
    """Greedy minimization of sum_i exp(-y_i f(x_i)), one (stump, beta) per round.

    Each candidate stump gets its own numerical line search over beta in
    [0, BETA_MAX] (the opposite-polarity stump covers negative beta); the
    candidate with the smallest exponential loss wins. The result stores
    beta_j as alphas under the ``halved`` convention.
    """
    _check_binary(ds, k)
    X, y = ds.X, ds.y
    f = np.zeros(ds.N)
    members, betas, losses = [], [], []
    for _ in range(k):
        w = np.exp(-y * f)
        w /= w.sum()  # a constant factor leaves the minimizer unchanged
        feat, thr, pol, miss_w = _stump_candidates(X, y, w)
        hit_w = 1.0 - miss_w

        def exp_loss(beta):
            return hit_w * np.exp(-beta) + miss_w * np.exp(beta)

        beta = golden_section_min(exp_loss, np.zeros_like(miss_w), BETA_MAX)
        i = _first_min(exp_loss(beta))
        stump = Stump(int(feat[i]), float(thr[i]), int(pol[i]))
        members.append(stump)
        betas.append(float(beta[i]))
        losses.append(clamp_loss(float(miss_w[i])))
        f = f + betas[-1] * stump.predict(X)
    return BoostModel(tuple(members), tuple(betas), tuple(losses), "halved")
