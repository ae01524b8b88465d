"""
Paired comparisons and rankings
===============================

The signed-rank test and the Friedman ranking on synthetic results.
"""

import numpy as np

from brainstorm import adjust_pvalues, friedman_with_posthoc, wilcoxon_signed_rank

rng = np.random.default_rng(0)

# 20 problems; the control is slightly better on most of them.
control = rng.lognormal(size=20)
other = control * rng.uniform(0.9, 1.6, size=20)
res = wilcoxon_signed_rank(control, other)
print(f"R+ = {res.R_plus}, R- = {res.R_minus}, p = {res.p_value:.3e} ({res.method})")

###############################################################################
# Three algorithms ranked over the same problems, control in column 0.

table = np.column_stack([control, other, control * rng.uniform(0.8, 1.3, size=20)])
fr = friedman_with_posthoc(table, control=0)
print("average ranks:", fr.average_ranks)
for j, p, ph in zip(fr.comparisons, fr.p_unadjusted, fr.p_holm):
    print(f"  column {j}: unadjusted {p:.4f}, Holm {ph:.4f}")

###############################################################################
# The three adjustments on one vector.

p = np.array([0.01, 0.04, 0.03, 0.2])
for method in ("bonferroni", "holm", "hochberg"):
    print(f"{method:10s}", adjust_pvalues(p, method))
