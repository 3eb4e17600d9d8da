"""Compare clean and adversarial training under worst-case attacks.

Trains two classifiers (delta = 0 and delta > 0), then attacks both
test sets with the closed-form worst-case perturbation. The robust
model trades a little clean accuracy for much better accuracy under
attack. Run with:

    python3 demos/worst_case_attacks.py
"""

import numpy as np

from advlin import (AttackSpec, ConeSpec, Dataset, NormKind, SolveOptions,
                    Task, choose_rho, solve_apgd, split,
                    worst_case_perturbation)

rng = np.random.default_rng(3)
n, p = 600, 20
X = rng.standard_normal((n, p))
beta_true = rng.standard_normal(p) / np.sqrt(p)
y = np.where(X @ beta_true + 0.5 * rng.standard_normal(n) >= 0, 1.0, -1.0)
ds = Dataset(X, y, Task.BINARY_CLASSIFICATION)
train, test = split(ds, 0.25, seed=0)

delta = 0.15
opts = SolveOptions(max_iter=5000, tol=1e-12)
models = {}
for name, d in (("clean", 0.0), ("robust", delta)):
    cone = ConeSpec(NormKind.LINF, d, choose_rho(train))
    models[name] = solve_apgd(train, cone, opts).beta


def accuracy(beta, attack=None):
    correct = 0
    for x, yi in zip(test.X, test.y):
        if attack is not None:
            x = x + worst_case_perturbation(x, yi, beta, attack,
                                            Task.BINARY_CLASSIFICATION)
        correct += yi * (x @ beta) > 0
    return correct / test.n


spec = AttackSpec(NormKind.LINF, delta)
print(f"attack: Linf radius {delta}\n")
print(f"{'model':>8} {'clean acc':>10} {'attacked acc':>13}")
for name, beta in models.items():
    print(f"{name:>8} {accuracy(beta):10.3f} {accuracy(beta, spec):13.3f}")
