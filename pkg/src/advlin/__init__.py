"""Adversarial training of linear models.

Classification is solved through a smooth constrained reformulation
with projected first-order methods; regression through iteratively
reweighted ridge regression with exact or conjugate-gradient inner
solves.  Closed-form adversarial evaluation and the simulation-based
default adversarial radius are included.
"""

from .attack import (AttackSpec, adversarial_loss_classification,
                     adversarial_loss_regression, default_delta,
                     worst_case_perturbation, zero_solution_threshold)
from .classify import (ConeSpec, ExtendedPoint, SagaState, choose_rho,
                       robust_logistic_objective, project, project_l1_cone,
                       project_l2_cone, risk_value_and_grad, solve_apgd,
                       solve_fgsm_baseline, solve_pgd, solve_pgd_linesearch,
                       solve_saga, solve_sgd)
from .core import (DataError, Dataset, FitResult, NormKind, NumericalError,
                   SolveOptions, Task, dual_norm,
                   empirical_second_moment_lambda_max, primal_norm)
from .data import (Family, SynthSpec, apply_standardization, generate,
                   ill_conditioned_classification, load_csv, split,
                   standardize)
from .regress import (RidgeSystem, WeightState, eta_trick_weights,
                      objective_l2, objective_linf, pcg_solve,
                      ridge_solve_dual, ridge_solve_primal, solve_icg,
                      solve_irrr, update_weights)

__version__ = "0.1.0"
