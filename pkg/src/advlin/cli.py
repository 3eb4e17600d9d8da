"""Command-line front end: train, evaluate, benchmark, synthesize.

Outputs are machine-readable: ``model.json`` with the fitted
coefficients and the transform parameters, ``trace.csv`` with the
per-iteration objective, and CSV tables for the benchmark suites.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import attack, classify, data as datamod, regress
from .core import (DataError, Dataset, NormKind, NumericalError,
                   SolveOptions, Task)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_CLF_SOLVERS = ("gd", "gd-ls", "agd", "sgd", "saga", "fgsm-gd", "fgsm-sgd")
_REG_SOLVERS = ("irrr", "icg")


class UsageError(Exception):
    pass


def _parse_norm(s: str) -> NormKind:
    return NormKind.LINF if s == "linf" else NormKind.L2


def _parse_synth(spec: str) -> datamod.SynthSpec:
    """Parse 'family:key=val,key=val' into a SynthSpec."""
    family_map = {
        "isotropic": datamod.Family.ISOTROPIC,
        "spiked": datamod.Family.SPIKED_COVARIANCE,
        "sparse": datamod.Family.SPARSE_VECTOR,
    }
    head, _, rest = spec.partition(":")
    if head not in family_map:
        raise UsageError(f"unknown synthetic family {head!r} "
                         f"(expected one of {sorted(family_map)})")
    kw = {}
    keys = {"n": int, "p": int, "noise_sd": float, "latent_dim": int,
            "sparsity": int, "feature_scale": float, "seed": int}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in keys:
                raise UsageError(f"unknown synthetic parameter {key!r}")
            try:
                kw[key] = keys[key](val)
            except ValueError:
                raise UsageError(f"bad value for synthetic parameter {key!r}: {val!r}")
    if "n" not in kw or "p" not in kw:
        raise UsageError("synthetic spec requires n= and p=")
    try:
        return datamod.SynthSpec(family=family_map[head], **kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _load_training_data(args, task: Task) -> Dataset:
    if args.data is not None:
        return datamod.load_csv(args.data, args.has_header, -1, task)
    spec = _parse_synth(args.synth)
    ds, _ = datamod.generate(spec)
    if task is Task.BINARY_CLASSIFICATION:
        y = np.where(ds.y >= 0, 1.0, -1.0)
        ds = Dataset(ds.X, y, task)
    return ds


def _fit(ds: Dataset, args, norm: NormKind, delta: float):
    opts = SolveOptions(max_iter=args.max_iter, tol=args.tol, seed=args.seed,
                        record_trace=args.trace)
    solver = args.solver
    if solver in ("irrr", "icg"):
        fn = regress.solve_irrr if solver == "irrr" else regress.solve_icg
        return fn(ds, delta, norm, opts)
    if solver in ("fgsm-gd", "fgsm-sgd"):
        if norm is not NormKind.LINF:
            raise UsageError("fgsm solvers require --norm linf")
        spec = attack.AttackSpec(NormKind.LINF, delta)
        return classify.solve_fgsm_baseline(ds, spec, opts,
                                            stochastic=solver == "fgsm-sgd")
    rho = classify.choose_rho(ds)
    cone = classify.ConeSpec(norm, delta, rho)
    dispatch = {"gd": classify.solve_pgd, "gd-ls": classify.solve_pgd_linesearch,
                "agd": classify.solve_apgd, "sgd": classify.solve_sgd,
                "saga": classify.solve_saga}
    return dispatch[solver](ds, cone, opts)


def _regression_metrics(ds: Dataset, beta, y_mean, norm, delta_eval):
    pred = ds.X @ beta + y_mean
    resid = ds.y - pred
    ss_tot = float(np.sum((ds.y - np.mean(ds.y)) ** 2))
    spec = attack.AttackSpec(norm, delta_eval)
    adv_sq = np.array([
        attack.adversarial_loss_regression(x, yc, beta, spec)
        for x, yc in zip(ds.X, ds.y - y_mean)
    ])
    metrics = {
        "rmse": float(np.sqrt(np.mean(resid ** 2))),
        "r2": 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0,
        "adv_rmse": float(np.sqrt(np.mean(adv_sq))),
        "adv_r2": 1.0 - float(np.sum(adv_sq)) / ss_tot if ss_tot > 0 else 0.0,
    }
    return metrics


def _classification_metrics(ds: Dataset, beta, norm, delta_eval):
    margin = ds.y * (ds.X @ beta)
    dn = attack.dual_norm(beta, norm)
    spec = attack.AttackSpec(norm, delta_eval)
    adv_losses = np.logaddexp(0.0, -(margin - delta_eval * dn))
    return {
        "accuracy": float(np.mean(margin > 0)),
        "adv_accuracy": float(np.mean(margin - delta_eval * dn > 0)),
        "loss": float(np.mean(np.logaddexp(0.0, -margin))),
        "adv_loss": float(np.mean(adv_losses)),
    }


def cmd_train(args) -> dict:
    task = Task.REGRESSION if args.task == "reg" else Task.BINARY_CLASSIFICATION
    if task is Task.REGRESSION and args.solver not in _REG_SOLVERS:
        raise UsageError(f"solver {args.solver!r} is not a regression solver "
                         f"(choose from {_REG_SOLVERS})")
    if task is Task.BINARY_CLASSIFICATION and args.solver not in _CLF_SOLVERS:
        raise UsageError(f"solver {args.solver!r} is not a classification solver "
                         f"(choose from {_CLF_SOLVERS})")
    norm = _parse_norm(args.norm)
    t_start = time.perf_counter()
    raw = _load_training_data(args, task)
    ds, means, scales = datamod.standardize(raw)
    y_mean = float(np.mean(ds.y)) if task is Task.REGRESSION else 0.0
    if task is Task.REGRESSION:
        ds = Dataset(ds.X, ds.y - y_mean, task)

    if args.delta == "default":
        delta = attack.default_delta(ds.X, norm, seed=args.seed)
    else:
        try:
            delta = float(args.delta)
        except ValueError:
            raise UsageError(f"--delta must be a number or 'default', "
                             f"got {args.delta!r}")
        if delta < 0:
            raise UsageError("--delta must be nonnegative")

    result = _fit(ds, args, norm, delta)

    if task is Task.REGRESSION:
        eval_ds = Dataset(ds.X, raw.y, task)  # standardized X, original y
        metrics = _regression_metrics(eval_ds, result.beta, y_mean, norm, delta)
    else:
        metrics = _classification_metrics(ds, result.beta, norm, delta)

    config = {
        "task": args.task, "norm": args.norm, "delta": delta,
        "delta_flag": args.delta, "solver": args.solver,
        "tol": args.tol, "max_iter": args.max_iter, "seed": args.seed,
        "data": args.data, "synth": args.synth, "has_header": args.has_header,
        "y_mean": y_mean,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = {
        "beta": [float(b) for b in result.beta],
        "means": [float(m) for m in means],
        "scales": [float(s) for s in scales],
        "config": config,
    }
    (out / "model.json").write_text(json.dumps(model, indent=2))
    with open(out / "trace.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["iter", "objective", "seconds"])
        for row in result.trace:
            wr.writerow([row[0], repr(row[1]), f"{row[2]:.6f}"])

    report = {
        "config": config,
        "fit": {"objective": result.objective,
                "iterations": result.iterations,
                "converged": result.converged,
                "solver_config": _jsonable(result.config)},
        "metrics": metrics,
        "wall_time_s": time.perf_counter() - t_start,
    }
    return report


def cmd_eval(args) -> dict:
    t_start = time.perf_counter()
    try:
        model = json.loads(Path(args.model).read_text())
    except OSError as exc:
        raise DataError(f"cannot read model {args.model}: {exc}") from exc
    beta = np.asarray(model["beta"], dtype=float)
    means = np.asarray(model["means"], dtype=float)
    scales = np.asarray(model["scales"], dtype=float)
    cfg = model["config"]
    task = Task.REGRESSION if cfg["task"] == "reg" else Task.BINARY_CLASSIFICATION
    norm = _parse_norm(args.norm if args.norm else cfg["norm"])
    raw = datamod.load_csv(args.data, args.has_header, -1, task)
    if raw.p != beta.size:
        raise DataError(f"model has {beta.size} coefficients but data has "
                        f"{raw.p} features")
    Xs = datamod.apply_standardization(raw.X, means, scales)
    ds = Dataset(Xs, raw.y, task)
    if task is Task.REGRESSION:
        metrics = _regression_metrics(ds, beta, cfg["y_mean"], norm,
                                      args.delta_eval)
    else:
        metrics = _classification_metrics(ds, beta, norm, args.delta_eval)
    return {
        "config": {"model": args.model, "data": args.data,
                   "delta_eval": args.delta_eval, "norm": norm.value},
        "metrics": metrics,
        "wall_time_s": time.perf_counter() - t_start,
    }


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

def _bench_convergence(args, out: Path):
    """Suboptimality-per-iteration curves on the ill-conditioned preset."""
    ds = datamod.ill_conditioned_classification(seed=args.seed)
    delta = 0.1
    rho = classify.choose_rho(ds)
    cone = classify.ConeSpec(NormKind.LINF, delta, rho)
    ref_opts = SolveOptions(max_iter=20000, tol=1e-12, seed=args.seed)
    ref = classify.solve_apgd(ds, cone, ref_opts)
    f_star = min(obj for _, obj, _ in ref.trace)

    budget = args.max_iter if args.max_iter is not None else 2000
    opts = SolveOptions(max_iter=budget, tol=1e-12, seed=args.seed)
    # max_iter counts epochs for the stochastic solvers, so cap their
    # budget separately; one epoch is n single-sample steps
    ep_opts = SolveOptions(max_iter=min(budget, 100), tol=1e-12,
                           seed=args.seed)
    runs = {
        "gd": classify.solve_pgd(ds, cone, opts),
        "gd-ls": classify.solve_pgd_linesearch(ds, cone, opts),
        "agd": classify.solve_apgd(ds, cone, opts),
        "sgd": classify.solve_sgd(ds, cone, ep_opts),
        "saga": classify.solve_saga(ds, cone, ep_opts),
        "fgsm-gd": classify.solve_fgsm_baseline(
            ds, attack.AttackSpec(NormKind.LINF, delta), opts),
    }
    # the reference is the minimum over everything recorded
    f_star = min([f_star] + [obj for r in runs.values() for _, obj, _ in r.trace])
    with open(out / "suboptimality.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["solver", "iter", "suboptimality"])
        for name, res in runs.items():
            for it, obj, _ in res.trace:
                wr.writerow([name, it, repr(obj - f_star)])
    return {"suite": "convergence", "reference_objective": f_star,
            "solvers": sorted(runs)}


def _bench_timing(args, out: Path):
    """Median wall time of the regression solvers over problem sizes."""
    sizes = [int(s) for s in args.sizes.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = []
    for p in sizes:
        spec = datamod.SynthSpec(family=datamod.Family.SPARSE_VECTOR,
                                 n=args.n, p=p, sparsity=max(1, p // 10),
                                 seed=seeds[0])
        ds, _ = datamod.generate(spec)
        ds, _, _ = datamod.standardize(ds)
        delta = attack.default_delta(ds.X, NormKind.LINF, mc_samples=200,
                                     seed=seeds[0])
        for solver, fn in (("irrr", regress.solve_irrr),
                           ("icg", regress.solve_icg)):
            times = []
            budget = args.max_iter if args.max_iter is not None else 10
            for rep in range(args.repeats):
                opts = SolveOptions(max_iter=budget, tol=1e-12,
                                    seed=seeds[rep % len(seeds)],
                                    record_trace=False)
                t0 = time.perf_counter()
                fn(ds, delta, NormKind.LINF, opts)
                times.append(time.perf_counter() - t0)
            rows.append((p, solver, statistics.median(times)))
    with open(out / "timing.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["size", "solver", "seconds"])
        for row in rows:
            wr.writerow([row[0], row[1], f"{row[2]:.6f}"])
    return {"suite": "timing", "rows": len(rows)}


def cmd_bench(args) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.suite == "convergence":
        return _bench_convergence(args, out)
    return _bench_timing(args, out)


def cmd_synth(args) -> dict:
    spec = _parse_synth(args.spec)
    ds, true_beta = datamod.generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "data.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"x{j}" for j in range(ds.p)] + ["y"])
        for xi, yi in zip(ds.X, ds.y):
            wr.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    truth = {
        "true_beta": [float(b) for b in true_beta],
        "spec": {"family": spec.family.value, "n": spec.n, "p": spec.p,
                 "noise_sd": spec.noise_sd, "latent_dim": spec.latent_dim,
                 "sparsity": spec.sparsity,
                 "feature_scale": spec.feature_scale, "seed": spec.seed},
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2))
    return {"written": [str(out / "data.csv"), str(out / "truth.json")]}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advlin",
        description="Adversarial training of linear models")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fit a model and write model.json/trace.csv")
    tr.add_argument("--task", choices=("reg", "clf"), required=True)
    tr.add_argument("--norm", choices=("linf", "l2"), default="linf")
    tr.add_argument("--delta", default="default",
                    help="adversarial radius, or 'default' for the "
                         "simulation-based rule")
    tr.add_argument("--solver", required=True,
                    choices=sorted(_CLF_SOLVERS + _REG_SOLVERS))
    src = tr.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV file; last column is the target")
    src.add_argument("--synth", help="synthetic spec, e.g. sparse:n=200,p=50,sparsity=5")
    tr.add_argument("--has-header", action="store_true")
    tr.add_argument("--tol", type=float, default=1e-8)
    tr.add_argument("--max-iter", type=int, default=500)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True)
    tr.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="clean and adversarial evaluation")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--has-header", action="store_true")
    ev.add_argument("--delta-eval", type=float, default=0.0)
    ev.add_argument("--norm", choices=("linf", "l2"), default=None)
    ev.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="convergence / timing sweeps")
    be.add_argument("--suite", choices=("convergence", "timing"), required=True)
    be.add_argument("--sizes", default="30,100,300,1000")
    be.add_argument("--seeds", default="0")
    be.add_argument("--n", type=int, default=504)
    be.add_argument("--repeats", type=int, default=5)
    be.add_argument("--max-iter", type=int, default=None,
                    help="outer-iteration budget; defaults to 2000 for the "
                         "convergence suite and 10 for timing")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out", required=True)
    be.set_defaults(func=cmd_bench)

    sy = sub.add_parser("synth", help="write a synthetic dataset + truth.json")
    sy.add_argument("--spec", required=True,
                    help="e.g. spiked:n=100,p=20,latent_dim=2,seed=1")
    sy.add_argument("--out", required=True)
    sy.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        report = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(report, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
