"""Shared domain types, norms and spectral utilities.

Everything here is used by both the classification and the regression
solver families: the dataset container, the perturbation-norm enum with
its dual, solver options / results, and a power-method estimate of the
largest eigenvalue of the empirical second-moment matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised when input data violates a structural precondition."""


class NumericalError(RuntimeError):
    """Raised when a solver encounters a numerical failure (overflow,
    step-size underflow, factorization breakdown)."""


class Task(enum.Enum):
    REGRESSION = "regression"
    BINARY_CLASSIFICATION = "binary_classification"


class NormKind(enum.Enum):
    """Perturbation norm of the attack model.

    The dual norm is derived, never stored: L2 is self-dual and the dual
    of Linf is L1.
    """

    L2 = "l2"
    LINF = "linf"


def dual_norm(v, norm: NormKind) -> float:
    """Dual norm of ``v``: ell-1 for LINF perturbations, ell-2 for L2."""
    v = np.asarray(v, dtype=float)
    if norm is NormKind.LINF:
        return float(np.sum(np.abs(v)))
    return float(np.linalg.norm(v))


def primal_norm(v, norm: NormKind) -> float:
    """The perturbation norm itself (used for feasibility checks)."""
    v = np.asarray(v, dtype=float)
    if norm is NormKind.LINF:
        return float(np.max(np.abs(v))) if v.size else 0.0
    return float(np.linalg.norm(v))


@dataclass(frozen=True)
class Dataset:
    """Design matrix X (n x p), targets y (n,), and the task kind.

    Arrays are copied and frozen at construction; instances are safe to
    share between concurrent solves.
    """

    X: np.ndarray
    y: np.ndarray
    task: Task

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True).ravel()
        if X.ndim != 2:
            raise DataError("X must be a 2-d matrix")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DataError("need at least one sample and one feature")
        if y.shape[0] != n:
            raise DataError(f"y has length {y.shape[0]}, expected {n}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DataError("X and y must be finite (no NaN/Inf)")
        if self.task is Task.BINARY_CLASSIFICATION and not np.all(np.abs(y) == 1.0):
            raise DataError("classification labels must be in {-1, +1}")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SolveOptions:
    """Common solver knobs.

    ``step_size`` overrides the automatic 1/L choice when set.  ``seed``
    drives every random draw (stochastic solvers, power-method start),
    making runs reproducible.
    """

    max_iter: int = 1000
    tol: float = 1e-8
    seed: int = 0
    step_size: float | None = None
    record_trace: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive when given")


@dataclass
class FitResult:
    """Final coefficients plus the objective trace of the solve.

    ``trace`` holds (iteration, objective, elapsed seconds) triples; for
    deterministic solvers the objective column is non-increasing after
    the first entry.
    """

    beta: np.ndarray
    objective: float
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    config: dict = field(default_factory=dict)


def relative_stop(f_new: float, f_old: float, tol: float) -> bool:
    """Stop rule shared by the deterministic solvers."""
    return abs(f_new - f_old) <= tol * (1.0 + abs(f_new))


def empirical_second_moment_lambda_max(data: Dataset, iters: int = 10,
                                       seed: int = 0) -> float:
    """Largest eigenvalue of (1/n) sum_i x_i x_i^T by power iteration.

    Works through matrix-vector products with X only, so the p x p
    second-moment matrix is never formed.  The start vector is a
    pseudo-random unit vector derived from ``seed``, making the estimate
    deterministic.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    X = data.X
    n, p = X.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        mv = X.T @ (X @ v) / n
        nrm = np.linalg.norm(mv)
        if nrm == 0.0:
            return 0.0
        v = mv / nrm
    return float(v @ (X.T @ (X @ v)) / n)
