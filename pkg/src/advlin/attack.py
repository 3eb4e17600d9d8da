"""Closed-form adversarial evaluation and attack construction.

For linear models the inner maximization over a norm-bounded input
perturbation has a closed form: the worst case shifts the prediction by
``delta`` times the dual norm of the coefficients.  This module houses
those closed forms, the explicit worst-case perturbation (FGSM in the
Linf case), the simulation-based default adversarial radius, and the
threshold above which the all-zero solution is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, NormKind, Task, dual_norm, primal_norm


@dataclass(frozen=True)
class AttackSpec:
    """Perturbation norm and adversarial radius (in input units)."""

    norm: NormKind
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


def adversarial_loss_regression(x, y: float, beta, spec: AttackSpec) -> float:
    """Worst-case squared error: (|y - x'beta| + delta * ||beta||_*)^2."""
    margin = abs(y - float(np.dot(x, beta)))
    return (margin + spec.delta * dual_norm(beta, spec.norm)) ** 2


def adversarial_loss_classification(x, y: float, beta, spec: AttackSpec) -> float:
    """Worst-case logistic loss: log(1 + exp(-(y x'beta - delta ||beta||_*))).

    Computed via logaddexp, so strongly negative margins give a finite
    value ~ -margin instead of overflowing.
    """
    margin = y * float(np.dot(x, beta)) - spec.delta * dual_norm(beta, spec.norm)
    return float(np.logaddexp(0.0, -margin))


def worst_case_perturbation(x, y: float, beta, spec: AttackSpec, task: Task):
    """Perturbation of norm <= delta attaining the inner maximum.

    Regression uses s* = -sign(y - x'beta); classification uses s* = -y.
    For Linf the attack is delta * s* * sign(beta) (coordinates where
    beta is zero are left untouched); for L2 it is delta * s* * beta/||beta||_2.
    A zero coefficient vector is attack-immune and gets a zero perturbation.
    """
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    nrm2 = np.linalg.norm(beta)
    if nrm2 == 0.0:
        return np.zeros_like(x)
    if task is Task.BINARY_CLASSIFICATION:
        s = -float(y)
    else:
        r = float(y) - float(np.dot(x, beta))
        s = -1.0 if r >= 0 else 1.0
    if spec.norm is NormKind.LINF:
        return spec.delta * s * np.sign(beta)
    return spec.delta * s * beta / nrm2


def default_delta(X, norm: NormKind, mc_samples: int = 1000,
                  percentile: float = 95.0, seed: int = 0) -> float:
    """Cross-validation-free adversarial radius.

    Draws standard-normal vectors eps of length n and returns the
    requested nearest-rank percentile of ||X'eps|| / ||eps||_1, with
    ||.|| the perturbation norm (max-abs for Linf, Euclidean for L2).
    That matches the scale of the zero-solution threshold under pure
    noise, so radii at or above it shrink noise-only fits to zero.
    Each sample uses its own spawned seed, so a parallel evaluation
    over samples would reproduce the sequential result exactly.
    """
    if mc_samples < 1:
        raise ValueError("mc_samples must be >= 1")
    if not 0.0 < percentile < 100.0:
        raise ValueError("percentile must lie in (0, 100)")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    children = np.random.SeedSequence(seed).spawn(mc_samples)
    ratios = np.empty(mc_samples)
    for k, child in enumerate(children):
        eps = np.random.default_rng(child).standard_normal(n)
        ratios[k] = primal_norm(X.T @ eps, norm) / np.sum(np.abs(eps))
    ratios.sort()
    rank = int(np.ceil(percentile / 100.0 * mc_samples))
    return float(ratios[rank - 1])


def zero_solution_threshold(data: Dataset, norm: NormKind) -> float:
    """Radius above which beta = 0 minimizes the adversarial objective.

    Returns ||X'y|| / ||y||_1, where ||.|| is the perturbation norm
    itself (max-abs for Linf attacks, Euclidean for L2).  That is the
    dual of the coefficient penalty norm, so it is exactly the scale at
    which the zero subgradient condition starts to hold.  Zero targets
    give threshold 0.
    """
    denom = float(np.sum(np.abs(data.y)))
    if denom == 0.0:
        return 0.0
    return primal_norm(data.X.T @ data.y, norm) / denom
