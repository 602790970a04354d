"""The log-profile family u_eps on the screen (-1, 1).

Each u_eps is supported in (eps, 3/4). On its own support its tilde-norm of
order 1/2 grows without bound as eps shrinks. The script shows that the
norm on the whole screen grows too, roughly like log log(1/eps), so the
ratio of the two does not blow up in the range a laptop can reach.
"""

import math

from fracsobolev import experiments as ex

eps_list = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
records = ex.run_counterexample_sweep(eps_list)
print(f"{'eps':>8} {'support':>10} {'screen':>10} {'ratio':>8} {'closed form':>12} {'loglog':>8}")
for r in records:
    if r.experiment_id != "counterexample":
        continue
    o, eps = r.observables, r.parameters["eps"]
    print(f"{eps:8.0e} {o['norm_sq_support']:10.4f} {o['norm_sq_screen']:10.4f} "
          f"{o['ratio_support_over_screen']:8.4f} {o['log_weighted_closed_form']:12.6f} "
          f"{math.log(math.log(1 / eps)):8.4f}")

print()
for r in records:
    if r.experiment_id != "counterexample":
        print(f"{r.experiment_id}: {'pass' if r.passed else 'fail'}  {r.observables}")
