"""Synthetic generators, CSV ingestion, standardization and splitting."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DataError, Dataset, Task


class Family(enum.Enum):
    ISOTROPIC = "isotropic"
    SPIKED_COVARIANCE = "spiked"
    SPARSE_VECTOR = "sparse"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the three Gaussian synthetic data families."""

    family: Family
    n: int
    p: int
    noise_sd: float = 1.0
    latent_dim: int = 1
    sparsity: int = 1
    feature_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.family is Family.SPIKED_COVARIANCE and not 1 <= self.latent_dim <= self.p:
            raise ValueError("latent_dim must satisfy 1 <= d <= p")
        if self.family is Family.SPARSE_VECTOR and not 1 <= self.sparsity <= self.p:
            raise ValueError("sparsity must satisfy 1 <= s <= p")
        if not self.feature_scale > 0:
            raise ValueError("feature_scale must be positive")


def generate(spec: SynthSpec):
    """Draw a regression dataset; returns (Dataset, true_beta).

    Isotropic: x ~ N(0, r^2 I), beta_j ~ N(0, 1/p), y = x'beta + noise.
    Spiked covariance: x = Wz + u with W'W = (p/d) I; the returned
    true_beta is the population-optimal linear predictor W (W'W)^-1 theta
    (reference only, the model is latent).
    Sparse: beta has s uniformly placed nonzeros ~ N(0, 1/s).
    """
    rng = np.random.default_rng(spec.seed)
    n, p = spec.n, spec.p
    if spec.family is Family.SPIKED_COVARIANCE:
        d = spec.latent_dim
        G = rng.standard_normal((p, d))
        Q, _ = np.linalg.qr(G)
        W = math.sqrt(p / d) * Q
        theta = rng.standard_normal(d)
        z = rng.standard_normal((n, d))
        u = rng.standard_normal((n, p))
        X = z @ W.T + u
        y = z @ theta + spec.noise_sd * rng.standard_normal(n)
        true_beta = W @ theta * (d / p)  # W (W'W)^-1 theta with W'W = (p/d) I
        return Dataset(X, y, Task.REGRESSION), true_beta
    if spec.family is Family.SPARSE_VECTOR:
        beta = np.zeros(p)
        support = rng.choice(p, size=spec.sparsity, replace=False)
        beta[support] = rng.standard_normal(spec.sparsity) / math.sqrt(spec.sparsity)
    else:
        beta = rng.standard_normal(p) / math.sqrt(p)
    X = spec.feature_scale * rng.standard_normal((n, p))
    y = X @ beta + spec.noise_sd * rng.standard_normal(n)
    return Dataset(X, y, Task.REGRESSION), beta


def ill_conditioned_classification(n: int = 200, p: int = 50, seed: int = 0,
                                   scale_span: float = 3.0) -> Dataset:
    """Fixed-seed classification instance with geometrically spread
    feature scales; used by the convergence benchmark suite.

    The label noise keeps the instance non-separable so the logistic
    optimum is attained at finite coefficients; larger scale_span makes
    the problem harder for fixed-step gradient methods.
    """
    rng = np.random.default_rng(seed)
    scales = np.logspace(0.0, math.log10(scale_span), p)
    X = rng.standard_normal((n, p)) * scales
    beta = rng.standard_normal(p) / scales  # keep every feature informative
    margin = X @ beta / math.sqrt(p)
    y = np.where(margin + rng.standard_normal(n) >= 0, 1.0, -1.0)
    return Dataset(X, y, Task.BINARY_CLASSIFICATION)


def load_csv(path, has_header: bool, target_column, task: Task) -> Dataset:
    """Parse a rectangular numeric CSV into a Dataset.

    ``target_column`` is a header name (when has_header) or a 0-based
    index; negative indices count from the right.  Classification labels
    in {0,1} are remapped to {-1,+1}; {-1,+1} pass through.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    names = None
    first_data = 0
    if has_header:
        names = [c.strip() for c in lines[0].split(",")]
        first_data = 1
        if len(lines) < 2:
            raise DataError(f"{path}: header but no data rows")
    ncols = len(lines[first_data].split(","))
    if names is not None and len(names) != ncols:
        raise DataError(f"{path}: header has {len(names)} fields, "
                        f"data rows have {ncols}")
    rows = []
    for lineno, ln in enumerate(lines[first_data:], start=first_data + 1):
        fields = [f.strip() for f in ln.split(",")]
        if len(fields) != ncols:
            raise DataError(f"{path}: line {lineno}: expected {ncols} fields, "
                            f"got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: non-numeric cell "
                            f"({exc})") from exc
    table = np.asarray(rows)
    if isinstance(target_column, str):
        if names is None:
            raise DataError("named target column requires has_header=True")
        if target_column not in names:
            raise DataError(f"target column {target_column!r} not in header")
        tcol = names.index(target_column)
    else:
        tcol = int(target_column)
        if tcol < 0:
            tcol += ncols
        if not 0 <= tcol < ncols:
            raise DataError(f"target column index {target_column} out of range")
    y = table[:, tcol]
    X = np.delete(table, tcol, axis=1)
    if task is Task.BINARY_CLASSIFICATION:
        vals = set(np.unique(y))
        if vals <= {0.0, 1.0}:
            y = 2.0 * y - 1.0
        elif not vals <= {-1.0, 1.0}:
            raise DataError("classification labels must be in {0,1} or {-1,+1}; "
                            f"found {sorted(vals)[:5]}")
    return Dataset(X, y, task)


def standardize(data: Dataset):
    """Center each column and divide by its standard deviation.

    Zero-variance columns are centered and given scale 1.  Returns the
    transformed dataset together with (means, scales) for test-time reuse.
    """
    means = data.X.mean(axis=0)
    scales = data.X.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    Xs = (data.X - means) / scales
    return Dataset(Xs, data.y, data.task), means, scales


def apply_standardization(X, means, scales):
    return (np.asarray(X, dtype=float) - means) / scales


def split(data: Dataset, test_fraction: float, seed: int = 0):
    """Seeded uniform shuffle then split into (train, test) datasets."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(data.n)
    n_train = math.ceil((1.0 - test_fraction) * data.n)
    if n_train == data.n:
        raise ValueError("test split is empty for this fraction and n")
    tr, te = order[:n_train], order[n_train:]
    train = Dataset(data.X[tr], data.y[tr], data.task)
    test = Dataset(data.X[te], data.y[te], data.task)
    return train, test
