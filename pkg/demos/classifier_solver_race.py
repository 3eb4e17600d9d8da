"""Race the classification solvers on an ill-conditioned instance.

Reproduces the qualitative ordering: accelerated projected gradient
beats line-search and fixed-step gradient descent, SAGA beats plain SGD,
and the smooth reformulation beats the FGSM-style subgradient baseline
at an equal full-gradient budget. Run with:

    python3 demos/classifier_solver_race.py
"""

from advlin import (AttackSpec, ConeSpec, NormKind, SolveOptions, choose_rho,
                    ill_conditioned_classification, solve_apgd,
                    solve_fgsm_baseline, solve_pgd, solve_pgd_linesearch,
                    solve_saga, solve_sgd)

ds = ill_conditioned_classification()
delta = 0.1
cone = ConeSpec(NormKind.LINF, delta, choose_rho(ds))
print(f"preset: n={ds.n}, p={ds.p}, delta={delta}, rho={cone.rho:.3f}\n")

opts = SolveOptions(max_iter=6000, tol=1e-12)
epoch_opts = SolveOptions(max_iter=100, tol=1e-300, seed=0)
runs = {
    "gd": solve_pgd(ds, cone, opts),
    "gd-ls": solve_pgd_linesearch(ds, cone, opts),
    "agd": solve_apgd(ds, cone, opts),
    "sgd (epochs)": solve_sgd(ds, cone, epoch_opts),
    "saga (epochs)": solve_saga(ds, cone, epoch_opts),
    "fgsm-gd": solve_fgsm_baseline(ds, AttackSpec(NormKind.LINF, delta),
                                   SolveOptions(max_iter=500, tol=1e-300)),
}
f_star = min(min(obj for _, obj, _ in r.trace) for r in runs.values())

print(f"{'solver':>14} {'iters':>6} {'final subopt':>13} {'to 1e-6 at':>11}")
for name, res in runs.items():
    hit = next((it for it, obj, _ in res.trace if obj - f_star <= 1e-6), None)
    final = res.trace[-1][1] - f_star
    print(f"{name:>14} {res.iterations:6d} {final:13.2e} "
          f"{hit if hit is not None else '-':>11}")
