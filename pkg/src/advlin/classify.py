"""Adversarial logistic regression via a smooth constrained reformulation.

The nonsmooth objective

    (1/n) sum_i h(y_i x_i'beta - delta ||beta||_*),   h(z) = log(1 + e^-z)

is minimized through the equivalent smooth problem in the augmented
variable w = (beta, t):

    min R(beta, t) = (1/n) sum_i h(y_i x_i'beta - rho t)
    s.t. rho t >= delta ||beta||_*

The feasible set is a convex cone with closed-form (L2) or sort-based
(L1-dual) Euclidean projections, so the whole projected first-order
toolbox applies: fixed-step GD, backtracking line search, FISTA-style
acceleration, SGD, and SAGA.  A direct subgradient solver for the
nonsmooth objective (the FGSM baseline) is included for comparison.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .attack import AttackSpec
from .core import (DataError, Dataset, FitResult, NormKind, NumericalError,
                   SolveOptions, Task, dual_norm,
                   empirical_second_moment_lambda_max, relative_stop)

_STEP_UNDERFLOW = 1e-18


@dataclass(frozen=True)
class ConeSpec:
    """Feasible cone {(beta, t): rho t >= delta ||beta||_*}."""

    norm: NormKind
    delta: float
    rho: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


@dataclass
class ExtendedPoint:
    """Augmented variable w = (beta, t) of the smooth reformulation."""

    beta: np.ndarray
    t: float

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.beta, dtype=float), [self.t]])

    def feasible(self, cone: ConeSpec, slack: float = 1e-9) -> bool:
        lhs = cone.rho * self.t
        rhs = cone.delta * dual_norm(self.beta, cone.norm)
        return lhs >= rhs - slack * (1.0 + abs(self.t))


class SagaState:
    """Per-sample loss-derivative table plus the running mean gradient.

    For the augmented logistic risk each per-sample gradient factors as
    h'(z_i) * (y_i x_i, -rho), so one scalar per sample suffices.
    """

    def __init__(self, gradient_table: np.ndarray, running_mean: np.ndarray):
        self.gradient_table = gradient_table
        self.running_mean = running_mean

    def reconstructed_mean(self, data: Dataset, cone: ConeSpec) -> np.ndarray:
        hp = self.gradient_table
        gb = data.X.T @ (hp * data.y) / data.n
        gt = -cone.rho * float(np.mean(hp))
        return np.concatenate([gb, [gt]])

    def mean_residual(self, data: Dataset, cone: ConeSpec) -> float:
        """Relative gap between the running mean and the table mean."""
        recon = self.reconstructed_mean(data, cone)
        return float(np.linalg.norm(self.running_mean - recon)
                     / (1.0 + np.linalg.norm(recon)))


def choose_rho(data: Dataset) -> float:
    """Scale coupling t to the data: rho^2 = trace((1/n) sum x_i x_i^T)."""
    rho2 = float(np.sum(data.X ** 2)) / data.n
    if rho2 == 0.0:
        raise DataError("all-zero design matrix: rho is undefined")
    return math.sqrt(rho2)


def _risk_value(w: np.ndarray, data: Dataset, cone: ConeSpec) -> float:
    z = data.y * (data.X @ w[:-1]) - cone.rho * w[-1]
    return float(np.mean(np.logaddexp(0.0, -z)))


def _risk_value_grad(w: np.ndarray, data: Dataset, cone: ConeSpec):
    z = data.y * (data.X @ w[:-1]) - cone.rho * w[-1]
    val = float(np.mean(np.logaddexp(0.0, -z)))
    hp = -expit(-z)  # h'(z) = -1/(1+e^z), always in (-1, 0)
    gb = data.X.T @ (hp * data.y) / data.n
    gt = -cone.rho * float(np.mean(hp))
    return val, np.concatenate([gb, [gt]])


def risk_value_and_grad(w: ExtendedPoint, data: Dataset, cone: ConeSpec):
    """Smooth risk R(beta, t) with its exact gradient (overflow-safe)."""
    if data.task is not Task.BINARY_CLASSIFICATION:
        raise DataError("risk is defined for classification datasets")
    return _risk_value_grad(w.as_array(), data, cone)


def robust_logistic_objective(beta, data: Dataset, norm: NormKind, delta: float) -> float:
    """Nonsmooth beta-space objective used for cross-solver comparison."""
    beta = np.asarray(beta, dtype=float)
    z = data.y * (data.X @ beta) - delta * dual_norm(beta, norm)
    return float(np.mean(np.logaddexp(0.0, -z)))


# ---------------------------------------------------------------------------
# Cone projections
# ---------------------------------------------------------------------------

def _project_arr(w: np.ndarray, cone: ConeSpec) -> np.ndarray:
    beta, t = w[:-1], w[-1]
    d, r = cone.delta, cone.rho
    if d == 0.0:
        # Cone degenerates to the half-space t >= 0.
        if t >= 0.0:
            return w
        out = w.copy()
        out[-1] = 0.0
        return out
    if cone.norm is NormKind.L2:
        nb = np.linalg.norm(beta)
        if r * t >= d * nb:
            return w
        if r * nb + d * t <= 0.0:
            return np.zeros_like(w)
        tp = d * (r * nb + d * t) / (d * d + r * r)
        bp = (r * tp / (d * nb)) * beta
        return np.concatenate([bp, [tp]])
    # Linf perturbations: dual norm is L1.
    absb = np.abs(beta)
    if r * t >= d * np.sum(absb):
        return w
    a = np.sort(absb)[::-1]
    csum = np.cumsum(a)
    lam_lo = max(0.0, -t / r)
    # roundoff guard: points sitting on the cone boundary produce
    # candidate multipliers a few ulps outside their breakpoint interval
    tiny = 1e-12 * (1.0 + a[0] + abs(t))
    lam = None
    for k in range(1, a.size + 1):
        cand = (d * csum[k - 1] - r * t) / (k * d * d + r * r)
        if cand < lam_lo - tiny:
            continue
        cand = max(cand, lam_lo)
        hi_ok = a[k - 1] - d * cand > -tiny
        lo_ok = k == a.size or a[k] - d * cand <= tiny
        if hi_ok and lo_ok:
            lam = cand
            break
    if lam is None:
        return np.zeros_like(w)
    bp = np.sign(beta) * np.maximum(absb - d * lam, 0.0)
    return np.concatenate([bp, [t + r * lam]])


def project_l2_cone(w: ExtendedPoint, cone: ConeSpec) -> ExtendedPoint:
    """Closed-form Euclidean projection onto the L2 cone.

    Feasible input is returned unchanged; points behind the apex map to
    (0, 0); otherwise the projected point lies on the cone boundary.
    """
    if cone.norm is not NormKind.L2:
        raise ValueError("project_l2_cone requires an L2 cone")
    out = _project_arr(w.as_array(), cone)
    return ExtendedPoint(out[:-1], float(out[-1]))


def project_l1_cone(w: ExtendedPoint, cone: ConeSpec) -> ExtendedPoint:
    """Projection onto the L1-dual cone via the sorted breakpoint scan.

    Solves delta * sum_j (|b_j| - delta*lam)_+ = rho (t + rho*lam) over
    the O(p) breakpoints of the left-hand side; total cost O(p log p).
    """
    if cone.norm is not NormKind.LINF:
        raise ValueError("project_l1_cone requires an Linf cone")
    out = _project_arr(w.as_array(), cone)
    return ExtendedPoint(out[:-1], float(out[-1]))


def project(w: ExtendedPoint, cone: ConeSpec) -> ExtendedPoint:
    out = _project_arr(w.as_array(), cone)
    return ExtendedPoint(out[:-1], float(out[-1]))


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def _setup(data: Dataset, cone: ConeSpec, opts: SolveOptions, power_iters: int):
    if data.task is not Task.BINARY_CLASSIFICATION:
        raise DataError("classification solvers require a classification dataset")
    lam = empirical_second_moment_lambda_max(data, power_iters, opts.seed)
    L = 0.5 * max(lam, cone.rho ** 2)
    gamma = opts.step_size if opts.step_size is not None else 1.0 / L
    w0 = np.zeros(data.p + 1)
    w0[-1] = 1e-12  # strictly feasible start for beta = 0
    return L, gamma, w0


def _base_config(name, cone, L, gamma, opts):
    return {
        "solver": name,
        "norm": cone.norm.value,
        "delta": cone.delta,
        "rho": cone.rho,
        "lipschitz_bound": L,
        "step_size": gamma,
        "max_iter": opts.max_iter,
        "tol": opts.tol,
        "seed": opts.seed,
    }


def _finish(w, data, cone, trace, iters, converged, config) -> FitResult:
    beta = w[:-1].copy()
    obj = robust_logistic_objective(beta, data, cone.norm, cone.delta)
    return FitResult(beta=beta, objective=obj, trace=trace,
                     iterations=iters, converged=converged, config=config)


def solve_pgd(data: Dataset, cone: ConeSpec, opts: SolveOptions,
              power_iters: int = 10) -> FitResult:
    """Projected gradient descent with a fixed step 1/L."""
    L, gamma, w = _setup(data, cone, opts, power_iters)
    t0 = time.perf_counter()
    trace = []
    f_prev = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
    if opts.record_trace:
        trace.append((0, f_prev, 0.0))
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        _, g = _risk_value_grad(w, data, cone)
        w = _project_arr(w - gamma * g, cone)
        f = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
        if opts.record_trace:
            trace.append((k, f, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    return _finish(w, data, cone, trace, k, converged,
                   _base_config("gd", cone, L, gamma, opts))


def _linesearch_step(w, val, g, gamma, data, cone):
    """Backtracking projected step from w; halves gamma until the FISTA
    sufficient-decrease condition holds.  Returns (w_new, gamma)."""
    while True:
        wp = _project_arr(w - gamma * g, cone)
        dw = wp - w
        quad = val + float(g @ dw) + float(dw @ dw) / (2.0 * gamma)
        if _risk_value(wp, data, cone) <= quad:
            return wp, gamma
        gamma *= 0.5
        if gamma < _STEP_UNDERFLOW:
            raise NumericalError("line search step size underflow")


def solve_pgd_linesearch(data: Dataset, cone: ConeSpec, opts: SolveOptions,
                         power_iters: int = 10) -> FitResult:
    """Projected GD with backtracking; the accepted step carries over."""
    L, gamma, w = _setup(data, cone, opts, power_iters)
    t0 = time.perf_counter()
    trace = []
    f_prev = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
    if opts.record_trace:
        trace.append((0, f_prev, 0.0))
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        val, g = _risk_value_grad(w, data, cone)
        w, gamma = _linesearch_step(w, val, g, gamma, data, cone)
        f = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
        if opts.record_trace:
            trace.append((k, f, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    return _finish(w, data, cone, trace, k, converged,
                   _base_config("gd-ls", cone, L, gamma, opts))


def solve_apgd(data: Dataset, cone: ConeSpec, opts: SolveOptions,
               power_iters: int = 10) -> FitResult:
    """FISTA-style accelerated projected GD with backtracking.

    The extrapolated point z may leave the cone; the gradient step and
    line search are taken from z and the result is projected back.  The
    trace records the best objective seen so far since acceleration is
    not monotone.
    """
    L, gamma, w = _setup(data, cone, opts, power_iters)
    t0 = time.perf_counter()
    trace = []
    f_prev = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
    best = f_prev
    if opts.record_trace:
        trace.append((0, best, 0.0))
    w_prev = w.copy()
    alpha = 1.0
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        alpha_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * alpha * alpha))
        mu = (alpha - 1.0) / alpha_next
        z = w + mu * (w - w_prev)
        val, g = _risk_value_grad(z, data, cone)
        wp, gamma = _linesearch_step(z, val, g, gamma, data, cone)
        w_prev, w, alpha = w, wp, alpha_next
        f = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
        best = min(best, f)
        if opts.record_trace:
            trace.append((k, best, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    return _finish(w, data, cone, trace, k, converged,
                   _base_config("agd", cone, L, gamma, opts))


def _sample_grad(w, i, data, cone):
    zi = data.y[i] * float(data.X[i] @ w[:-1]) - cone.rho * w[-1]
    hp = -float(expit(-zi))
    g = np.empty_like(w)
    g[:-1] = hp * data.y[i] * data.X[i]
    g[-1] = -cone.rho * hp
    return g, hp


def solve_sgd(data: Dataset, cone: ConeSpec, opts: SolveOptions,
              power_iters: int = 10) -> FitResult:
    """Projected SGD with a decaying step gamma_k = gamma0/sqrt(1 + k/n).

    One epoch is n single-sample steps; the trace records the beta-space
    objective once per epoch and max_iter counts epochs.
    """
    L, gamma0, w = _setup(data, cone, opts, power_iters)
    rng = np.random.default_rng(opts.seed)
    n = data.n
    t0 = time.perf_counter()
    trace = []
    f_prev = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
    if opts.record_trace:
        trace.append((0, f_prev, 0.0))
    converged = False
    step = 0
    epoch = 0
    for epoch in range(1, opts.max_iter + 1):
        for _ in range(n):
            i = int(rng.integers(n))
            g, _ = _sample_grad(w, i, data, cone)
            gk = gamma0 / math.sqrt(1.0 + step / n)
            w = _project_arr(w - gk * g, cone)
            step += 1
        f = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
        if opts.record_trace:
            trace.append((epoch, f, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    return _finish(w, data, cone, trace, epoch, converged,
                   _base_config("sgd", cone, L, gamma0, opts))


def solve_saga(data: Dataset, cone: ConeSpec, opts: SolveOptions,
               power_iters: int = 10) -> FitResult:
    """Projected SAGA with a fixed step 1/(3L).

    The gradient table stores one loss-derivative scalar per sample and
    is initialized by a full pass at the start point.  The returned
    FitResult carries the final SagaState as ``saga_state``.
    """
    L, _, w = _setup(data, cone, opts, power_iters)
    gamma = opts.step_size if opts.step_size is not None else 1.0 / (3.0 * L)
    rng = np.random.default_rng(opts.seed)
    n = data.n
    z = data.y * (data.X @ w[:-1]) - cone.rho * w[-1]
    table = -expit(-z)
    gbar = np.concatenate([data.X.T @ (table * data.y) / n,
                           [-cone.rho * float(np.mean(table))]])
    t0 = time.perf_counter()
    trace = []
    f_prev = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
    if opts.record_trace:
        trace.append((0, f_prev, 0.0))
    converged = False
    epoch = 0
    for epoch in range(1, opts.max_iter + 1):
        for _ in range(n):
            i = int(rng.integers(n))
            g_new, hp_new = _sample_grad(w, i, data, cone)
            dh = hp_new - table[i]
            v_diff = np.empty_like(w)
            v_diff[:-1] = dh * data.y[i] * data.X[i]
            v_diff[-1] = -cone.rho * dh
            w = _project_arr(w - gamma * (v_diff + gbar), cone)
            gbar += v_diff / n
            table[i] = hp_new
        f = robust_logistic_objective(w[:-1], data, cone.norm, cone.delta)
        if opts.record_trace:
            trace.append((epoch, f, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    res = _finish(w, data, cone, trace, epoch, converged,
                  _base_config("saga", cone, L, gamma, opts))
    res.saga_state = SagaState(table, gbar)
    return res


def solve_fgsm_baseline(data: Dataset, spec: AttackSpec, opts: SolveOptions,
                        stochastic: bool = False,
                        power_iters: int = 10) -> FitResult:
    """Subgradient descent on the nonsmooth beta-space objective.

    Each step recomputes the worst-case Linf perturbation
    dx_i = -delta * y_i * sign(beta) and takes a fixed-size gradient step
    of the perturbed loss; no line search is possible for this baseline.
    """
    if spec.norm is not NormKind.LINF:
        raise ValueError("the FGSM baseline is defined for Linf attacks")
    if data.task is not Task.BINARY_CLASSIFICATION:
        raise DataError("classification solvers require a classification dataset")
    lam = empirical_second_moment_lambda_max(data, power_iters, opts.seed)
    if lam == 0.0:
        raise DataError("all-zero design matrix")
    L = 0.5 * lam
    gamma = opts.step_size if opts.step_size is not None else 1.0 / L
    d = spec.delta
    n = data.n
    rng = np.random.default_rng(opts.seed)
    beta = np.zeros(data.p)
    t0 = time.perf_counter()
    trace = []

    def objective(b):
        return robust_logistic_objective(b, data, NormKind.LINF, d)

    f_prev = objective(beta)
    if opts.record_trace:
        trace.append((0, f_prev, 0.0))
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        if stochastic:
            for _ in range(n):
                i = int(rng.integers(n))
                zi = data.y[i] * float(data.X[i] @ beta) - d * np.sum(np.abs(beta))
                hp = -float(expit(-zi))
                g = hp * (data.y[i] * data.X[i] - d * np.sign(beta))
                beta = beta - gamma * g
        else:
            z = data.y * (data.X @ beta) - d * np.sum(np.abs(beta))
            hp = -expit(-z)
            g = data.X.T @ (hp * data.y) / n - d * float(np.mean(hp)) * np.sign(beta)
            beta = beta - gamma * g
        f = objective(beta)
        if opts.record_trace:
            trace.append((k, f, time.perf_counter() - t0))
        if relative_stop(f, f_prev, opts.tol):
            converged = True
            break
        f_prev = f
    name = "fgsm-sgd" if stochastic else "fgsm-gd"
    config = {"solver": name, "norm": spec.norm.value, "delta": d,
              "lipschitz_bound": L, "step_size": gamma,
              "max_iter": opts.max_iter, "tol": opts.tol, "seed": opts.seed}
    return FitResult(beta=beta, objective=objective(beta), trace=trace,
                     iterations=k, converged=converged, config=config)
