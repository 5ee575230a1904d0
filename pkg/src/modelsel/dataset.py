"""Datasets, deterministic splitting and sampling, synthetic generators.

All randomness is driven by explicit integer seeds so every function here
is a pure function of its inputs.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np


class DatasetError(ValueError):
    """Base class for dataset construction and ingestion errors."""


class CsvMissingFileError(DatasetError, FileNotFoundError):
    pass


class CsvEmptyError(DatasetError):
    pass


class CsvParseError(DatasetError):
    def __init__(self, row: int, column: str, value: str):
        self.row, self.column, self.value = row, column, value
        super().__init__(
            f"non-numeric cell {value!r} at row {row}, column {column!r}"
        )


class CsvRaggedError(DatasetError):
    pass


class LabelColumnError(DatasetError):
    pass


@dataclass(frozen=True)
class Instance:
    features: np.ndarray
    label: float


@dataclass(frozen=True)
class Dataset:
    """N instances of dimension d, stored as a feature matrix and label vector.

    ``true_values`` holds the noiseless model output f_i for synthetic data.
    """

    X: np.ndarray
    y: np.ndarray
    true_values: Optional[np.ndarray] = None
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise DatasetError("features must be a 2-D array")
        if X.shape[0] != y.shape[0]:
            raise DatasetError(
                f"{X.shape[0]} feature rows but {y.shape[0]} labels"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.true_values is not None:
            f = np.asarray(self.true_values, dtype=float).ravel()
            if f.shape[0] != y.shape[0]:
                raise DatasetError("true_values length must equal N")
            object.__setattr__(self, "true_values", f)
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != X.shape[1]:
                raise DatasetError("feature_names length must equal d")
            object.__setattr__(self, "feature_names", names)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.N

    @property
    def instances(self) -> list:
        return [Instance(self.X[i].copy(), float(self.y[i])) for i in range(self.N)]

    @property
    def is_classification(self) -> bool:
        return bool(np.all(np.isin(self.y, (-1.0, 1.0))))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        tv = None if self.true_values is None else self.true_values[idx]
        return Dataset(self.X[idx], self.y[idx], tv, self.feature_names)

    @classmethod
    def from_instances(cls, instances: Sequence[Instance], d: int) -> "Dataset":
        X = np.empty((len(instances), d))
        y = np.empty(len(instances))
        for i, inst in enumerate(instances):
            feats = np.asarray(inst.features, dtype=float).ravel()
            if feats.shape[0] != d:
                raise DatasetError(
                    f"instance {i} has {feats.shape[0]} features, expected {d}"
                )
            X[i], y[i] = feats, inst.label
        return cls(X, y)


@dataclass(frozen=True)
class Split:
    """Disjoint index sets into a Dataset. ``val_idx`` is optional."""

    train_idx: tuple
    test_idx: tuple
    val_idx: Optional[tuple] = None

    def __post_init__(self):
        parts = [tuple(int(i) for i in self.train_idx),
                 tuple(int(i) for i in self.test_idx)]
        object.__setattr__(self, "train_idx", parts[0])
        object.__setattr__(self, "test_idx", parts[1])
        if self.val_idx is not None:
            parts.append(tuple(int(i) for i in self.val_idx))
            object.__setattr__(self, "val_idx", parts[2])
        if not parts[0]:
            raise DatasetError("training set must be nonempty")
        seen: set = set()
        for p in parts:
            s = set(p)
            if len(s) != len(p) or seen & s:
                raise DatasetError("split index sets must be pairwise disjoint")
            seen |= s
        if any(i < 0 for i in seen):
            raise DatasetError("negative index in split")

    def check(self, n: int) -> None:
        """Raise unless every index lies in ``range(n)``."""
        for part in (self.train_idx, self.test_idx, self.val_idx or ()):
            if part and max(part) >= n:
                raise DatasetError(f"split index {max(part)} out of range for N={n}")


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def load_csv(path, label_column: Union[int, str] = -1) -> Dataset:
    """Read a headed, comma-separated numeric file.

    ``label_column`` is a header name or a 0-based (possibly negative)
    column index. Every other column becomes a feature.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise CsvMissingFileError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise CsvEmptyError("no data rows")
    header = [h.strip() for h in rows[0]]
    width = len(header)
    if width < 2:
        raise DatasetError("need at least one feature column and one label column")

    if isinstance(label_column, str) and label_column in header:
        lab = header.index(label_column)
    else:
        try:
            lab = int(label_column)
        except (TypeError, ValueError):
            raise LabelColumnError(f"unknown label column {label_column!r}") from None
        if not -width <= lab < width:
            raise LabelColumnError(
                f"label column {lab} out of range for {width} columns"
            )
        lab %= width

    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise CsvRaggedError(
                f"row {r} has {len(row)} cells, header has {width}"
            )
        for c, cell in enumerate(row):
            try:
                data[r - 1, c] = float(cell)
            except ValueError:
                raise CsvParseError(r, header[c], cell) from None

    feat_cols = [c for c in range(width) if c != lab]
    return Dataset(
        data[:, feat_cols],
        data[:, lab],
        feature_names=tuple(header[c] for c in feat_cols),
    )


def save_csv(ds: Dataset, path, label_name: str = "y") -> None:
    names = ds.feature_names or tuple(f"x{j}" for j in range(ds.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [label_name])
        for xi, yi in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


# ---------------------------------------------------------------------------
# Splitting and sampling
# ---------------------------------------------------------------------------

def _check_stratify(ds: Dataset, stratify: bool) -> None:
    if stratify and not ds.is_classification:
        raise DatasetError("stratified sampling requires ±1 labels")


def split_holdout(ds: Dataset, fractions: Sequence[float], seed: int = 42,
                  stratify: bool = False) -> Split:
    """Random train/test[/validation] split.

    Test and validation sizes are ``floor(fraction * N)``; the remainder goes
    to training.
    """
    fractions = [float(f) for f in fractions]
    if len(fractions) not in (2, 3):
        raise DatasetError("fractions must be (train, test) or (train, test, val)")
    if any(not 0.0 < f < 1.0 for f in fractions):
        raise DatasetError("each fraction must lie in (0, 1)")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DatasetError(f"fractions sum to {sum(fractions)!r}, not 1")
    _check_stratify(ds, stratify)
    n = ds.N
    if n < len(fractions):
        raise DatasetError(f"N={n} too small for {len(fractions)} parts")

    rng = np.random.default_rng(seed)
    if stratify:
        groups = [np.flatnonzero(ds.y == c) for c in (-1.0, 1.0)]
    else:
        groups = [np.arange(n)]

    parts: list[list[int]] = [[] for _ in fractions]
    for g in groups:
        perm = rng.permutation(g)
        sizes = [math.floor(f * len(g)) for f in fractions[1:]]
        start = 0
        for k, sz in enumerate(sizes, start=1):
            parts[k].extend(perm[start:start + sz].tolist())
            start += sz
        parts[0].extend(perm[start:].tolist())

    if any(len(p) == 0 for p in parts):
        raise DatasetError(f"N={n} too small: a split part would be empty")
    parts = [sorted(p) for p in parts]
    return Split(parts[0], parts[1], parts[2] if len(parts) == 3 else None)


def kfold_partitions(ds: Dataset, K: int, seed: int = 42,
                     stratify: bool = False) -> list:
    """Shuffle and cut {0..N-1} into K near-equal disjoint partitions.

    The first ``N mod K`` partitions receive one extra index.
    """
    n = ds.N if isinstance(ds, Dataset) else int(ds)
    if not 2 <= K <= n:
        raise DatasetError(f"K={K} must satisfy 2 <= K <= N={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    if stratify:
        _check_stratify(ds, stratify)
        # stable sort by class keeps the shuffle within class; dealing
        # round-robin then balances both sizes and classes
        perm = perm[np.argsort(ds.y[perm], kind="stable")]
        return [sorted(perm[k::K].tolist()) for k in range(K)]
    base, extra = divmod(n, K)
    out, start = [], 0
    for k in range(K):
        size = base + (1 if k < extra else 0)
        out.append(sorted(perm[start:start + size].tolist()))
        start += size
    return out


def bootstrap_sample(ds: Dataset, size: Optional[int] = None,
                     feature_fraction: float = 1.0, seed: int = 42):
    """Draw ``size`` instances uniformly with replacement (default size N).

    With ``feature_fraction < 1`` a uniform subset of ``ceil(fraction * d)``
    features is kept as well. Returns ``(sample, feature_indices)``.
    """
    size = ds.N if size is None else int(size)
    if size < 1:
        raise DatasetError("bootstrap size must be >= 1")
    if not 0.0 < feature_fraction <= 1.0:
        raise DatasetError("feature_fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, ds.N, size=size)
    if feature_fraction < 1.0:
        m = math.ceil(feature_fraction * ds.d)
        feats = np.sort(rng.choice(ds.d, size=m, replace=False))
    else:
        feats = np.arange(ds.d)
    tv = None if ds.true_values is None else ds.true_values[rows]
    names = None if ds.feature_names is None else tuple(ds.feature_names[j] for j in feats)
    return Dataset(ds.X[np.ix_(rows, feats)], ds.y[rows], tv, names), feats


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Known true model plus additive Gaussian noise.

    kind:
      ``polynomial``  f(x) = sum_k coefficients[k] * x**k (1-D)
      ``sine``        f(x) = amplitude * sin(2*pi*frequency*x + phase) (1-D)
      ``table``       piecewise-linear interpolation of (table_x, table_f) (1-D)
      ``linear``      f(x) = coefficients[0] + coefficients[1:] . x (d-D)
    """

    kind: str = "sine"
    coefficients: tuple = ()
    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0
    table_x: tuple = ()
    table_f: tuple = ()
    noise_sigma: float = 0.3
    domain: tuple = ((0.0, 1.0),)

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise DatasetError("noise_sigma must be >= 0")
        dom = self.domain
        if len(dom) == 2 and np.isscalar(dom[0]):
            dom = (tuple(dom),)
        dom = tuple((float(lo), float(hi)) for lo, hi in dom)
        if any(hi <= lo for lo, hi in dom):
            raise DatasetError("domain bounds must satisfy lo < hi")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.kind not in ("polynomial", "sine", "table", "linear"):
            raise DatasetError(f"unknown true_function kind {self.kind!r}")
        if self.kind == "polynomial" and not self.coefficients:
            raise DatasetError("polynomial needs at least one coefficient (degree >= 0)")
        if self.kind == "linear" and len(self.coefficients) != len(dom) + 1:
            raise DatasetError("linear needs d + 1 coefficients (intercept first)")
        if self.kind != "linear" and len(dom) != 1:
            raise DatasetError(f"{self.kind} true function is 1-D only")
        if self.kind == "table":
            tx, tf = np.asarray(self.table_x, float), np.asarray(self.table_f, float)
            if tx.size < 2 or tx.size != tf.size or np.any(np.diff(tx) <= 0):
                raise DatasetError("table needs >= 2 strictly increasing x values")

    @property
    def d(self) -> int:
        return len(self.domain)

    def true_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.d)
        if self.kind == "linear":
            c = np.asarray(self.coefficients)
            return c[0] + X @ c[1:]
        x = X[:, 0]
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, self.coefficients)
        if self.kind == "sine":
            return self.amplitude * np.sin(2 * np.pi * self.frequency * x + self.phase)
        return np.interp(x, self.table_x, self.table_f)


def generate_synthetic(spec: SyntheticSpec, n: int, seed: int = 42) -> Dataset:
    """Sample n inputs uniformly on the domain box; y = f(x) + N(0, sigma^2)."""
    if n < 1:
        raise DatasetError("n must be >= 1")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in spec.domain])
    hi = np.array([b[1] for b in spec.domain])
    X = lo + (hi - lo) * rng.random((n, spec.d))
    f = spec.true_function(X)
    y = f + spec.noise_sigma * rng.standard_normal(n)
    return Dataset(X, y, true_values=f)


@dataclass(frozen=True)
class MixtureSpec:
    """Two isotropic Gaussian classes at +mean (label +1) and -mean (label -1).

    Equal priors and shared covariance make the Bayes rule sign(mean . x).
    """

    mean: tuple = (1.0, 0.5)
    sigma: float = 1.0
    prior_pos: float = 0.5

    def __post_init__(self):
        if self.sigma <= 0:
            raise DatasetError("sigma must be > 0")
        if not 0.0 < self.prior_pos < 1.0:
            raise DatasetError("prior_pos must lie in (0, 1)")
        object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))

    @property
    def d(self) -> int:
        return len(self.mean)

    def bayes_predict(self, X: np.ndarray) -> np.ndarray:
        mu = np.asarray(self.mean)
        prior_term = 0.5 * self.sigma ** 2 * math.log(self.prior_pos / (1 - self.prior_pos))
        score = np.asarray(X, float).reshape(-1, self.d) @ mu + prior_term
        return np.where(score >= 0, 1.0, -1.0)


def generate_mixture(spec: MixtureSpec, n: int, seed: int = 42) -> Dataset:
    if n < 1:
        raise DatasetError("n must be >= 1")
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) < spec.prior_pos, 1.0, -1.0)
    X = y[:, None] * np.asarray(spec.mean) + spec.sigma * rng.standard_normal((n, spec.d))
    return Dataset(X, y)
