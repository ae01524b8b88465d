"""
Minimizing a rotated function
=============================

Build a shifted and rotated benchmark, then minimize it with the adaptive
variant and with classic brain storm optimization.
"""

import numpy as np

from brainstorm import BsoConfig, make_benchmark, run

# A 10-dimensional rastrigin with a random shift and rotation. Its minimum
# value is the bias, reached at the shift vector.
spec, f = make_benchmark("rastrigin", 10, seed=3)
print(f"{spec.id}: optimum {spec.bias} at |o| = {np.linalg.norm(spec.optimum):.2f}")

###############################################################################
# Both runs share a budget of 20000 evaluations and the same seed.

for variant in ("classic_bso", "asbso_ims"):
    cfg = BsoConfig(budget=20000, variant=variant)
    record, trace = run(f, cfg, seed=0)
    print(f"{variant:12s} best {record.best_fitness - spec.bias:10.4f} above optimum "
          f"after {record.evals_used} evaluations")

###############################################################################
# The trace holds best-so-far values once per iteration.

evals, best = np.array(trace.samples).T
for frac in (0.1, 0.5, 1.0):
    i = int(frac * (len(evals) - 1))
    print(f"  {int(evals[i]):6d} evals: {best[i] - spec.bias:.4f}")
