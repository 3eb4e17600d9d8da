"""End-to-end tests of the command-line interface."""

import csv
import json

import numpy as np
import pytest

from advlin.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    report = json.loads(out.out) if code == 0 and out.out.strip() else None
    return code, report, out.err


def train_args(outdir, **over):
    base = {
        "task": "reg", "solver": "irrr", "norm": "linf", "delta": "0.1",
        "synth": "sparse:n=60,p=10,sparsity=3,seed=0", "tol": "1e-10",
        "max-iter": "500", "seed": "0",
    }
    base.update(over)
    argv = ["train", "--out", str(outdir)]
    for k, v in base.items():
        if v is None:
            continue
        argv += [f"--{k}"] if v == "" else [f"--{k}", v]
    return argv


class TestTrain:
    def test_regression_outputs(self, tmp_path, capsys):
        code, report, _ = run_cli(train_args(tmp_path), capsys)
        assert code == 0
        model = json.loads((tmp_path / "model.json").read_text())
        assert set(model) == {"beta", "means", "scales", "config"}
        assert len(model["beta"]) == 10
        assert len(model["means"]) == len(model["scales"]) == 10
        with open(tmp_path / "trace.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iter", "objective", "seconds"]
        objs = [float(r[1]) for r in rows[1:]]
        assert all(a >= b - 1e-10 * (1 + abs(b)) for a, b in zip(objs, objs[1:]))
        assert report["fit"]["converged"]

    def test_zero_radius_matches_least_squares(self, tmp_path, capsys):
        code, report, _ = run_cli(
            train_args(tmp_path, delta="0", tol="1e-13", **{"max-iter": "2000"}),
            capsys)
        assert code == 0
        # rebuild the exact training matrix the CLI used and compare the
        # reported rmse against the unregularized least-squares fit
        from advlin import Family, SynthSpec, generate, standardize
        ds, _ = generate(SynthSpec(family=Family.SPARSE_VECTOR, n=60, p=10,
                                   sparsity=3, seed=0))
        ds, means, scales = standardize(ds)
        yc = ds.y - np.mean(ds.y)
        beta, *_ = np.linalg.lstsq(ds.X, yc, rcond=None)
        rmse = float(np.sqrt(np.mean((yc - ds.X @ beta) ** 2)))
        assert report["metrics"]["rmse"] == pytest.approx(rmse, abs=1e-6)
        model = json.loads((tmp_path / "model.json").read_text())
        assert np.allclose(model["beta"], beta, atol=1e-6)

    def test_classification_train(self, tmp_path, capsys):
        code, report, _ = run_cli(
            train_args(tmp_path, task="clf", solver="agd",
                       synth="isotropic:n=80,p=5,seed=2"), capsys)
        assert code == 0
        assert 0.0 <= report["metrics"]["accuracy"] <= 1.0
        assert report["metrics"]["adv_loss"] >= report["metrics"]["loss"] - 1e-12

    def test_reproducible_given_seed(self, tmp_path, capsys):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        run_cli(train_args(a_dir, solver="icg"), capsys)
        run_cli(train_args(b_dir, solver="icg"), capsys)
        a = json.loads((a_dir / "model.json").read_text())
        b = json.loads((b_dir / "model.json").read_text())
        assert a["beta"] == b["beta"]

    def test_missing_data_file_is_data_error(self, tmp_path, capsys):
        code, _, err = run_cli(
            train_args(tmp_path, synth=None, data=str(tmp_path / "nope.csv")),
            capsys)
        assert code == 3
        assert "data error" in err

    def test_solver_task_mismatch_is_usage_error(self, tmp_path, capsys):
        code, _, err = run_cli(train_args(tmp_path, solver="agd"), capsys)
        assert code == 2
        assert "regression" in err

    def test_fgsm_requires_linf(self, tmp_path, capsys):
        code, _, err = run_cli(
            train_args(tmp_path, task="clf", solver="fgsm-gd", norm="l2"),
            capsys)
        assert code == 2

    def test_unknown_flag_is_usage_error(self, tmp_path, capsys):
        code = main(train_args(tmp_path) + ["--bogus"])
        capsys.readouterr()
        assert code == 2

    def test_bad_delta_string(self, tmp_path, capsys):
        code, _, err = run_cli(train_args(tmp_path, delta="lots"), capsys)
        assert code == 2

    def test_bad_synth_spec(self, tmp_path, capsys):
        code, _, err = run_cli(train_args(tmp_path, synth="weird:n=5,p=2"),
                               capsys)
        assert code == 2


class TestEval:
    def _train_and_data(self, tmp_path, capsys):
        run_cli(["synth", "--spec", "sparse:n=60,p=10,sparsity=3,seed=0",
                 "--out", str(tmp_path / "d")], capsys)
        run_cli(train_args(tmp_path / "m", synth=None,
                           data=str(tmp_path / "d" / "data.csv"),
                           **{"has-header": ""}), capsys)
        return str(tmp_path / "m" / "model.json"), \
            str(tmp_path / "d" / "data.csv")

    def test_zero_radius_evaluation_is_clean(self, tmp_path, capsys):
        model, data = self._train_and_data(tmp_path, capsys)
        code, report, _ = run_cli(
            ["eval", "--model", model, "--data", data, "--has-header",
             "--delta-eval", "0"], capsys)
        assert code == 0
        m = report["metrics"]
        assert m["adv_rmse"] == pytest.approx(m["rmse"], rel=1e-12)
        assert m["adv_r2"] == pytest.approx(m["r2"], rel=1e-12)

    def test_adversarial_r2_non_increasing_in_radius(self, tmp_path, capsys):
        model, data = self._train_and_data(tmp_path, capsys)
        scores = []
        for d in ("0", "0.05", "0.1", "0.2"):
            _, report, _ = run_cli(
                ["eval", "--model", model, "--data", data, "--has-header",
                 "--delta-eval", d], capsys)
            scores.append(report["metrics"]["adv_r2"])
        assert all(a >= b - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_missing_model_is_data_error(self, tmp_path, capsys):
        code, _, _ = run_cli(
            ["eval", "--model", str(tmp_path / "no.json"), "--data",
             str(tmp_path / "no.csv")], capsys)
        assert code == 3

    def test_feature_count_mismatch(self, tmp_path, capsys):
        model, _ = self._train_and_data(tmp_path, capsys)
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,4\n")
        code, _, err = run_cli(["eval", "--model", model, "--data", str(bad)],
                               capsys)
        assert code == 3
        assert "coefficients" in err


class TestBench:
    def test_convergence_suite(self, tmp_path, capsys):
        code, report, _ = run_cli(
            ["bench", "--suite", "convergence", "--max-iter", "300",
             "--out", str(tmp_path)], capsys)
        assert code == 0
        with open(tmp_path / "suboptimality.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["solver", "iter", "suboptimality"]
        by_solver = {}
        for solver, it, sub in rows[1:]:
            assert float(sub) >= 0.0
            by_solver.setdefault(solver, []).append(float(sub))
        assert set(by_solver) == {"gd", "gd-ls", "agd", "sgd", "saga",
                                  "fgsm-gd"}
        # momentum beats plain gradient descent at the same budget
        assert by_solver["agd"][-1] <= by_solver["gd"][-1] + 1e-12

    def test_timing_suite(self, tmp_path, capsys):
        code, report, _ = run_cli(
            ["bench", "--suite", "timing", "--sizes", "10,20", "--n", "50",
             "--repeats", "2", "--max-iter", "3", "--out", str(tmp_path)],
            capsys)
        assert code == 0
        with open(tmp_path / "timing.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["size", "solver", "seconds"]
        assert len(rows) - 1 == 2 * 2
        assert all(float(r[2]) >= 0.0 for r in rows[1:])


class TestSynth:
    def test_round_trip_and_truth(self, tmp_path, capsys):
        code, report, _ = run_cli(
            ["synth", "--spec", "isotropic:n=12,p=3,seed=7",
             "--out", str(tmp_path)], capsys)
        assert code == 0
        from advlin import (Family, SynthSpec, Task, generate, load_csv)
        ds = load_csv(tmp_path / "data.csv", has_header=True,
                      target_column="y", task=Task.REGRESSION)
        ref, beta = generate(SynthSpec(family=Family.ISOTROPIC, n=12, p=3,
                                       seed=7))
        assert np.array_equal(ds.X, ref.X)
        assert np.array_equal(ds.y, ref.y)
        truth = json.loads((tmp_path / "truth.json").read_text())
        assert truth["true_beta"] == [float(b) for b in beta]

    def test_bad_spec_is_usage_error(self, tmp_path, capsys):
        code, _, _ = run_cli(["synth", "--spec", "isotropic:n=12",
                              "--out", str(tmp_path)], capsys)
        assert code == 2
