"""Command-line front end.

Every subcommand writes CSV (header row, numbers at 12 significant digits)
to standard output, except ``verify`` which prints PASS/FAIL lines. Options
can also come from ``--config FILE`` holding ``key=value`` lines; flags on
the command line win over the file, which wins over built-in defaults.

Exit codes: 0 success, 1 computation or verification failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import importlib.resources
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from . import crossval, ensemble, regularize, risk, smoothers, verify
from .dataset import (Dataset, DatasetError, MixtureSpec, SyntheticSpec,
                      generate_synthetic, load_csv)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Option tables
# ---------------------------------------------------------------------------

def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text) -> list:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text) -> list:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _optional_float(text):
    return None if text in (None, "", "none") else float(text)


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable
    default: Any
    help: str
    choices: Optional[tuple] = None


SEED = Opt("seed", int, 42, "random seed")
DATA = Opt("data", str, None, "input CSV (defaults to a bundled sample)")
LABEL = Opt("label", str, "-1", "label column: header name or index")

OPTIONS = {
    "cv": [
        DATA, LABEL, SEED,
        Opt("method", str, "kfold", "validation scheme", ("kfold", "loocv", "shortcut", "gcv")),
        Opt("model", str, "ols", "model family", ("ols", "ridge", "mean")),
        Opt("alpha", float, 1.0, "ridge penalty"),
        Opt("k", int, 5, "number of folds for kfold"),
        Opt("intercept", _bool, False, "prepend a column of ones"),
    ],
    "curve": [
        SEED,
        Opt("n", int, 30, "training (and validation) sample size"),
        Opt("sigma", float, 0.3, "noise standard deviation"),
        Opt("amplitude", float, 1.0, "sine amplitude"),
        Opt("frequency", float, 1.0, "sine frequency"),
        Opt("degrees", _int_list, list(range(13)), "comma-separated polynomial degrees"),
        Opt("noise", str, "given", "noise variance source", ("given", "estimated")),
    ],
    "boost": [
        DATA, LABEL, SEED,
        Opt("k", int, 10, "number of boosting rounds"),
        Opt("convention", str, "algorithm3", "alpha convention", ("algorithm3", "halved")),
        Opt("method", str, "adaboost", "fitting procedure", ("adaboost", "stagewise")),
    ],
    "bag": [
        SEED,
        Opt("s", float, 1.0, "variance of each member's error"),
        Opt("c", float, 0.0, "covariance between members' errors"),
        Opt("k", _int_list, [1, 2, 5, 10, 20, 50], "comma-separated ensemble sizes"),
        Opt("reps", int, 100_000, "Monte-Carlo replicates"),
    ],
    "bvdart": [
        SEED,
        Opt("k", _int_list, [1, 5, 25], "comma-separated bag sizes"),
        Opt("reps", int, 20, "training-set redraws"),
        Opt("n_train", int, 100, "training sample size"),
        Opt("n_test", int, 10_000, "test sample size"),
    ],
    "lasso": [
        DATA, LABEL, SEED,
        Opt("alphas", _float_list, None, "comma-separated penalties (default: grid below alpha_max)"),
        Opt("intercept", _bool, True, "fit an unpenalized intercept"),
        Opt("standardize", _bool, True, "scale columns to unit variance first"),
        Opt("tol", float, 1e-8, "coordinate-change tolerance"),
        Opt("max_iter", int, 10_000, "maximum coordinate-descent cycles"),
    ],
    "ridge": [
        DATA, LABEL, SEED,
        Opt("alpha", float, 1.0, "ridge penalty"),
        Opt("intercept", _bool, False, "prepend a column of ones (penalized)"),
    ],
    "ols": [
        DATA, LABEL, SEED,
        Opt("intercept", _bool, False, "prepend a column of ones"),
    ],
    "sure": [
        DATA, LABEL, SEED,
        Opt("model", str, "ols", "model family", ("ols", "ridge")),
        Opt("alpha", float, 1.0, "ridge penalty"),
        Opt("intercept", _bool, True, "prepend a column of ones"),
        Opt("sigma", _optional_float, None, "noise standard deviation (default: estimate)"),
    ],
    "verify": [
        SEED,
        Opt("suite", str, None, "run one suite only", verify.SUITES),
    ],
}

DEFAULT_DATA = {
    "cv": "sample_regression.csv",
    "lasso": "sample_regression.csv",
    "ridge": "sample_regression.csv",
    "ols": "sample_regression.csv",
    "sure": "sample_regression.csv",
    "boost": "separable.csv",
}

HELP = {
    "cv": "cross-validate a linear model (kfold, loocv, shortcut, gcv)",
    "curve": "training error, validation error and SURE versus polynomial degree",
    "boost": "per-round AdaBoost diagnostics",
    "bag": "variance of an average of correlated errors, simulated versus theory",
    "bvdart": "bias and variance of bagged stumps on a Gaussian mixture",
    "lasso": "lasso coefficients along a penalty grid",
    "ridge": "ridge coefficients",
    "ols": "least-squares coefficients",
    "sure": "SURE estimate of true error for a linear fit",
    "verify": "run the oracle checks",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelsel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        for o in opts:
            flag = "--" + o.name.replace("_", "-")
            if o.type is _bool:
                p.add_argument(flag, dest=o.name, action=argparse.BooleanOptionalAction,
                               default=None, help=f"{o.help} (default {o.default})")
            else:
                p.add_argument(flag, dest=o.name, type=o.type, choices=o.choices,
                               default=None, help=f"{o.help} (default {o.default})")
    return parser


def read_config(path: str, opts: list) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    known = {o.name: o for o in opts}
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        opt = known[key]
        try:
            converted = opt.type(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
        if opt.choices is not None and converted not in opt.choices:
            raise UsageError(f"{path}:{lineno}: {key} must be one of {', '.join(opt.choices)}")
        values[key] = converted
    return values


def resolve_options(args: argparse.Namespace) -> dict:
    opts = OPTIONS[args.command]
    merged = {o.name: o.default for o in opts}
    if args.config:
        merged.update(read_config(args.config, opts))
    for o in opts:
        value = getattr(args, o.name)
        if value is not None:
            merged[o.name] = value
    return merged


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return "%.12g" % v


def emit(header, rows, out=None) -> None:
    out = out or sys.stdout
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _label(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def load_data(cfg: dict, command: str) -> Dataset:
    label = _label(cfg["label"])
    if cfg["data"]:
        return load_csv(cfg["data"], label)
    resource = importlib.resources.files("modelsel") / "data" / DEFAULT_DATA[command]
    with importlib.resources.as_file(resource) as path:
        return load_csv(path, label)


def _coef_header(p: int) -> list:
    return [f"beta_{j}" for j in range(p)]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_cv(cfg: dict) -> int:
    ds = load_data(cfg, "cv")
    method, model = cfg["method"], cfg["model"]
    if method == "kfold" and not 2 <= cfg["k"] <= ds.N:
        raise UsageError(f"--k {cfg['k']} must satisfy 2 <= K <= N={ds.N}")
    design = regularize.add_intercept(ds.X) if cfg["intercept"] else ds.X
    if model == "ols":
        learner = crossval.ols_learner(cfg["intercept"])
        make_smoother = lambda: smoothers.ols_hat(design)
    elif model == "ridge":
        if cfg["alpha"] < 0:
            raise UsageError("--alpha must be >= 0")
        learner = crossval.ridge_learner(cfg["alpha"], cfg["intercept"])
        make_smoother = lambda: smoothers.ridge_hat(design, cfg["alpha"])
    else:
        learner = crossval.mean_learner
        make_smoother = lambda: smoothers.mean_smoother(ds.N)

    rows = []
    if method == "kfold":
        res = crossval.kfold_cv(ds, cfg["k"], learner, seed=cfg["seed"])
        rows = list(enumerate(res.fold_errors))
        sse = math.fsum(e * len(f) for e, f in zip(res.fold_errors, res.folds))
        rows += [(-1, res.mean_error), (-2, sse)]
    elif method == "loocv":
        res = crossval.loocv(ds, learner)
        rows = list(enumerate(res.fold_errors))
        rows += [(-1, res.mean_error), (-2, math.fsum(res.fold_errors))]
    elif method == "shortcut":
        res = crossval.loocv_shortcut(make_smoother(), ds.y)
        rows = list(enumerate(res.residuals ** 2))
        rows += [(-1, res.sse / ds.N), (-2, res.sse)]
    else:
        g = crossval.gcv(make_smoother(), ds.y)
        rows = [(-1, g / ds.N), (-2, g)]
    emit(["index", "error"], rows)
    return EXIT_OK


def _legendre_design(x: np.ndarray, degree: int, lo: float, hi: float) -> np.ndarray:
    z = 2.0 * (x - lo) / (hi - lo) - 1.0
    return np.polynomial.legendre.legvander(z, degree)


def cmd_curve(cfg: dict) -> int:
    n, sigma = cfg["n"], cfg["sigma"]
    if n < 2 or sigma < 0:
        raise UsageError("need n >= 2 and sigma >= 0")
    if any(d < 0 for d in cfg["degrees"]):
        raise UsageError("degrees must be >= 0")
    spec = SyntheticSpec("sine", amplitude=cfg["amplitude"], frequency=cfg["frequency"],
                         noise_sigma=sigma)
    train = generate_synthetic(spec, n, seed=cfg["seed"])
    val = generate_synthetic(spec, n, seed=cfg["seed"] + 1)
    lo, hi = spec.domain[0]
    x, xv = train.X[:, 0], val.X[:, 0]
    if cfg["noise"] == "given":
        sigma2 = sigma ** 2
    else:
        line = smoothers.ols_hat(_legendre_design(x, 1, lo, hi))
        sigma2 = risk.estimate_noise_variance(train.y, smoothers.predict(line, train.y)).sigma2

    rows = []
    nan = math.nan
    for deg in cfg["degrees"]:
        if deg >= n:
            print(f"degree {deg}: singular design (degree >= n = {n})", file=sys.stderr)
            rows.append((deg, nan, nan, nan, nan, nan, nan))
            continue
        V = _legendre_design(x, deg, lo, hi)
        try:
            hat = smoothers.ols_hat(V)
            beta = smoothers.gram_solve(V, V.T @ train.y)
        except smoothers.SingularDesignError as exc:
            print(f"degree {deg}: {exc}", file=sys.stderr)
            rows.append((deg, nan, nan, nan, nan, nan, nan))
            continue
        df = smoothers.effective_dof(hat)
        err = float(np.sum((smoothers.predict(hat, train.y) - train.y) ** 2))
        pred_val = _legendre_design(xv, deg, lo, hi) @ beta
        err_val = float(np.sum((pred_val - val.y) ** 2))
        oracle = float(np.sum((pred_val - val.true_values) ** 2))
        rows.append((deg, df, err, err_val, risk.test_err(err_val, n, sigma2),
                     risk.sure_err(err, n, sigma2, df), oracle))
    emit(["degree", "df", "err", "err_val", "Err_validation", "Err_sure", "Err_oracle"], rows)
    return EXIT_OK


def cmd_boost(cfg: dict) -> int:
    ds = load_data(cfg, "boost")
    if cfg["k"] < 1:
        raise UsageError("--k must be >= 1")
    if cfg["method"] == "stagewise":
        m = ensemble.stagewise_additive_fit(ds, cfg["k"])
        if cfg["convention"] == "algorithm3":
            m = m.rescaled(2.0)
    else:
        m = ensemble.adaboost_train(ds, cfg["k"], cfg["convention"])
    rows = []
    scores = np.zeros(ds.N)
    log_bound = 0.0
    for j, (h, a, L) in enumerate(zip(m.members, m.alphas, m.losses), start=1):
        scores += a * h.predict(ds.X)
        train_error = float(np.mean(ensemble.sign(scores) != ds.y))
        log_bound += math.log(2.0) + 0.5 * (math.log(L) + math.log1p(-L))
        rows.append((j, h.feature, h.threshold, h.polarity, L, a, train_error,
                     math.exp(log_bound)))
    emit(["round", "feature", "threshold", "polarity", "L", "alpha", "train_error",
          "bound"], rows)
    return EXIT_OK


def cmd_bag(cfg: dict) -> int:
    if not cfg["k"] or min(cfg["k"]) < 1:
        raise UsageError("--k needs positive integers")
    if cfg["reps"] < 2:
        raise UsageError("--reps must be >= 2")
    rows = []
    for k in cfg["k"]:
        try:
            r = ensemble.bagging_variance_mc(cfg["s"], cfg["c"], k, cfg["reps"], cfg["seed"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows.append((k, r.empirical_var, r.theory_var, r.std_error))
    emit(["k", "empirical_var", "theory_var", "se"], rows)
    return EXIT_OK


def cmd_bvdart(cfg: dict) -> int:
    if not cfg["k"] or min(cfg["k"]) < 1 or cfg["reps"] < 1:
        raise UsageError("--k and --reps must be positive")
    if cfg["n_train"] < 2 or cfg["n_test"] < 1:
        raise UsageError("need n_train >= 2 and n_test >= 1")
    rows = []
    for k in cfg["k"]:
        r = risk.ensemble_bias_variance(MixtureSpec(), ensemble.stump_learner, k,
                                        reps=cfg["reps"], n_train=cfg["n_train"],
                                        n_test=cfg["n_test"], seed=cfg["seed"])
        rows.append((k, r.bias, r.variance, r.pe_bayes, r.pe_main, r.pe_mean))
    emit(["k", "bias", "variance", "pe_bayes", "pe_main", "pe_mean"], rows)
    return EXIT_OK


def cmd_lasso(cfg: dict) -> int:
    ds = load_data(cfg, "lasso")
    alphas = cfg["alphas"]
    if alphas is None:
        top = regularize.lasso_alpha_max(ds.X, ds.y, cfg["intercept"], cfg["standardize"])
        alphas = list(top * np.logspace(0, -3, 8))
    if any(a < 0 for a in alphas):
        raise UsageError("alphas must be >= 0")
    rows = []
    for a in alphas:
        fit = regularize.lasso_cd(ds.X, ds.y, a, tol=cfg["tol"], max_iter=cfg["max_iter"],
                                  fit_intercept=cfg["intercept"],
                                  standardize=cfg["standardize"])
        coef = fit.beta[1:] if cfg["intercept"] else fit.beta
        rows.append((a, fit.iterations, fit.converged, int(np.count_nonzero(coef)),
                     fit.objective_trace[-1], *fit.beta))
    p = ds.d + int(cfg["intercept"])
    emit(["alpha", "iterations", "converged", "nonzero", "objective", *_coef_header(p)], rows)
    return EXIT_OK


def cmd_ridge(cfg: dict) -> int:
    ds = load_data(cfg, "ridge")
    if cfg["alpha"] < 0:
        raise UsageError("--alpha must be >= 0")
    fit = regularize.ridge_solve(ds.X, ds.y, cfg["alpha"], cfg["intercept"])
    emit(_coef_header(fit.beta.size), [tuple(fit.beta)])
    return EXIT_OK


def cmd_ols(cfg: dict) -> int:
    ds = load_data(cfg, "ols")
    fit = regularize.ols_solve(ds.X, ds.y, cfg["intercept"])
    emit(_coef_header(fit.beta.size), [tuple(fit.beta)])
    return EXIT_OK


def cmd_sure(cfg: dict) -> int:
    ds = load_data(cfg, "sure")
    design = regularize.add_intercept(ds.X) if cfg["intercept"] else ds.X
    if cfg["model"] == "ridge":
        if cfg["alpha"] < 0:
            raise UsageError("--alpha must be >= 0")
        hat = smoothers.ridge_hat(design, cfg["alpha"])
    else:
        hat = smoothers.ols_hat(design)
    fitted = smoothers.predict(hat, ds.y)
    if cfg["sigma"] is None:
        # rigid reference fit: least squares with intercept on the raw features
        ref = smoothers.predict(smoothers.ols_hat(regularize.add_intercept(ds.X)), ds.y)
        noise = risk.estimate_noise_variance(ds.y, ref)
    else:
        if cfg["sigma"] < 0:
            raise UsageError("--sigma must be >= 0")
        noise = risk.NoiseModel(cfg["sigma"] ** 2, "given")
    err = float(np.sum((fitted - ds.y) ** 2))
    rep = risk.RiskReport.training(err, ds.N, noise.sigma2, smoothers.effective_dof(hat))
    emit(["n", "df", "sigma2", "sigma_estimated", "err", "Err_sure"],
         [(ds.N, rep.complexity, rep.sigma2, noise.provenance == "estimated", rep.err,
           rep.Err)])
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    results = verify.run_checks(cfg["suite"], cfg["seed"],
                                report=lambda r: print(r.line(), flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


COMMANDS = {
    "cv": cmd_cv, "curve": cmd_curve, "boost": cmd_boost, "bag": cmd_bag,
    "bvdart": cmd_bvdart, "lasso": cmd_lasso, "ridge": cmd_ridge, "ols": cmd_ols,
    "sure": cmd_sure, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_options(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def run() -> None:
    with contextlib.suppress(BrokenPipeError):
        sys.exit(main())
