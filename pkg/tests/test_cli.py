import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from modelsel.cli import main
from modelsel.dataset import load_csv

DATA = Path(__file__).resolve().parents[1] / "src" / "modelsel" / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, rows


def summary(text):
    _, rows = table(text)
    return {int(i): v for i, v in rows if i < 0}


class TestCv:
    def test_mean_shortcut_two_points(self, capsys):
        code, out, _ = run(capsys, "cv", "--method", "shortcut", "--model", "mean",
                           "--data", DATA / "two_points.csv")
        assert code == 0
        assert summary(out)[-2] == pytest.approx(8.0)

    def test_k_larger_than_n(self, capsys):
        code, _, err = run(capsys, "cv", "--method", "kfold", "--k", 10,
                           "--data", DATA / "two_points.csv")
        assert code == 2 and "K" in err

    @pytest.mark.parametrize("intercept", ["--intercept", "--no-intercept"])
    def test_shortcut_matches_loocv(self, capsys, intercept):
        _, a, _ = run(capsys, "cv", "--method", "shortcut", intercept)
        _, b, _ = run(capsys, "cv", "--method", "loocv", intercept)
        sa, sb = summary(a), summary(b)
        assert sa[-2] == pytest.approx(sb[-2], rel=1e-8)
        assert sa[-1] == pytest.approx(sb[-1], rel=1e-8)

    def test_interpolating_smoother_exit_1(self, capsys):
        code, _, err = run(capsys, "cv", "--method", "shortcut",
                           "--data", DATA / "two_points.csv")
        assert code == 1 and "index 1" in err

    def test_gcv_equals_shortcut_for_mean(self, capsys):
        _, a, _ = run(capsys, "cv", "--method", "gcv", "--model", "mean")
        _, b, _ = run(capsys, "cv", "--method", "shortcut", "--model", "mean")
        assert summary(a)[-2] == pytest.approx(summary(b)[-2], rel=1e-12)

    def test_kfold_rows(self, capsys):
        code, out, _ = run(capsys, "cv", "--k", 4, "--model", "ridge", "--alpha", 0.5)
        header, rows = table(out)
        assert code == 0 and header == ["index", "error"]
        folds = rows[rows[:, 0] >= 0]
        assert len(folds) == 4
        assert summary(out)[-1] == pytest.approx(folds[:, 1].mean())

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "cv", "--data", tmp_path / "nope.csv")
        assert code == 2 and "no such file" in err

    def test_bad_choice(self, capsys):
        code, _, _ = run(capsys, "cv", "--method", "bogus")
        assert code == 2


class TestCurve:
    def test_matches_golden(self, capsys):
        _, out, _ = run(capsys, "curve")
        gh, grows = table((GOLDEN / "curve_default.csv").read_text())
        h, rows = table(out)
        assert h == gh
        np.testing.assert_allclose(rows, grows, rtol=1e-9, atol=1e-12)

    def test_u_shape(self, capsys):
        _, out, _ = run(capsys, "curve")
        h, rows = table(out)
        ev = rows[:, h.index("Err_validation")]
        assert 0 < int(np.argmin(ev)) < len(ev) - 1

    def test_err_non_increasing(self, capsys):
        _, out, _ = run(capsys, "curve", "--n", 40)
        h, rows = table(out)
        err = rows[:, h.index("err")]
        assert np.all(np.diff(err) <= 1e-9 * err[:-1])

    def test_degree_zero_is_centered_sum_of_squares(self, capsys):
        from modelsel.dataset import SyntheticSpec, generate_synthetic
        _, out, _ = run(capsys, "curve", "--degrees", "0", "--n", 25, "--seed", 3)
        h, rows = table(out)
        y = generate_synthetic(SyntheticSpec(noise_sigma=0.3), 25, seed=3).y
        assert rows[0, h.index("err")] == pytest.approx(25 * y.var(), rel=1e-10)
        assert rows[0, h.index("df")] == pytest.approx(1.0)

    def test_degree_at_least_n_is_nan_row(self, capsys):
        code, out, err = run(capsys, "curve", "--n", 5, "--degrees", "1,5,7")
        h, rows = table(out)
        assert code == 0
        assert np.isfinite(rows[0, 1:]).all()
        assert np.isnan(rows[1:, 1:]).all()
        assert "degree 5" in err and "degree 7" in err

    def test_estimated_noise(self, capsys):
        code, out, _ = run(capsys, "curve", "--noise", "estimated", "--degrees", "1,3")
        assert code == 0 and len(table(out)[1]) == 2


class TestOtherCommands:
    def test_boost_separable_one_round(self, capsys):
        code, out, _ = run(capsys, "boost", "--k", 1)
        h, rows = table(out)
        assert code == 0 and rows[0, h.index("train_error")] == 0

    def test_boost_bound_dominates_training_error(self, capsys, tmp_path):
        from modelsel.dataset import MixtureSpec, generate_mixture, save_csv
        path = tmp_path / "mixture.csv"
        save_csv(generate_mixture(MixtureSpec(), 150, seed=1), path)
        _, out, _ = run(capsys, "boost", "--k", 25, "--data", path)
        h, rows = table(out)
        assert np.all(rows[:, h.index("train_error")] <= rows[:, h.index("bound")])

    def test_boost_stagewise_matches_adaboost(self, capsys):
        _, a, _ = run(capsys, "boost", "--k", 3)
        _, b, _ = run(capsys, "boost", "--k", 3, "--method", "stagewise")
        np.testing.assert_allclose(table(a)[1], table(b)[1], rtol=1e-6)

    def test_bag_theory(self, capsys):
        code, out, _ = run(capsys, "bag", "--s", 1, "--c", 0, "--k", 10)
        h, rows = table(out)
        assert code == 0 and rows[0, h.index("theory_var")] == pytest.approx(0.1)

    def test_bag_non_psd_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "bag", "--s", 1, "--c", -0.9, "--k", 5)
        assert code == 2

    def test_ridge_alpha_zero_equals_ols_bitwise(self, capsys):
        _, a, _ = run(capsys, "ridge", "--alpha", 0)
        _, b, _ = run(capsys, "ols")
        assert a == b
        _, a, _ = run(capsys, "ridge", "--alpha", 0, "--intercept")
        _, b, _ = run(capsys, "ols", "--intercept")
        assert a == b

    def test_lasso_sparsity_path(self, capsys):
        code, out, _ = run(capsys, "lasso")
        h, rows = table(out)
        assert code == 0
        assert rows[0, h.index("nonzero")] == 0
        assert np.all(np.diff(rows[:, h.index("nonzero")]) >= 0)
        assert np.all(rows[:, h.index("converged")] == 1)

    def test_sure(self, capsys):
        code, out, _ = run(capsys, "sure", "--sigma", 0.3)
        h, rows = table(out)
        n, df, s2, est, err, Err = rows[0]
        assert code == 0 and est == 0
        assert Err == pytest.approx(err - n * 0.09 + 2 * 0.09 * df)

    def test_bvdart(self, capsys):
        code, out, _ = run(capsys, "bvdart", "--k", "1,5", "--reps", 3, "--n-test", 1000)
        h, rows = table(out)
        assert code == 0 and h[:3] == ["k", "bias", "variance"] and len(rows) == 2


class TestConfig:
    def test_config_applies(self, capsys, tmp_path):
        cfg = tmp_path / "c.txt"
        cfg.write_text("# ridge settings\nalpha = 2.5  # inline comment\n\nintercept=true\n")
        _, a, _ = run(capsys, "ridge", "--config", cfg)
        _, b, _ = run(capsys, "ridge", "--alpha", 2.5, "--intercept")
        assert a == b

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.txt"
        cfg.write_text("alpha=2.5\n")
        _, a, _ = run(capsys, "ridge", "--config", cfg, "--alpha", 0.1)
        _, b, _ = run(capsys, "ridge", "--alpha", 0.1)
        assert a == b

    @pytest.mark.parametrize("text", ["colour=blue\n", "alpha=abc\n", "alpha\n"])
    def test_bad_config(self, capsys, tmp_path, text):
        cfg = tmp_path / "c.txt"
        cfg.write_text(text)
        code, _, err = run(capsys, "ridge", "--config", cfg)
        assert code == 2 and err

    def test_missing_config(self, capsys, tmp_path):
        code, _, _ = run(capsys, "ridge", "--config", tmp_path / "none.txt")
        assert code == 2


class TestContracts:
    COMMANDS = [
        ["cv"], ["cv", "--method", "loocv"], ["cv", "--method", "gcv"], ["curve"],
        ["boost", "--k", "4"], ["bag", "--k", "1,3", "--reps", "2000"], ["lasso"],
        ["ridge"], ["ols"], ["sure"],
        ["bvdart", "--k", "1", "--reps", "2", "--n-test", "500"],
    ]

    @pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: " ".join(a))
    def test_deterministic_and_round_trips(self, capsys, tmp_path, argv):
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b
        path = tmp_path / "out.csv"
        path.write_text(a)
        ds = load_csv(path, 0)
        assert ds.N == len(a.strip().splitlines()) - 1

    def test_verify_suite_filter(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "crossval")
        lines = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
        assert code == 0
        assert [ln.split("]")[0][-2:].strip() for ln in lines] == ["1", "2"]

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "--suite", "nope")
        assert code == 2

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "modelsel", "bag", "--k", "2", "--reps",
                              "100"], capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.startswith("k,empirical_var")

    def test_no_command(self, capsys):
        assert main([]) == 2
