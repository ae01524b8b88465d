"""
How the improvement memory picks step scales
============================================

Watch the probabilities of the four step-length scales change over a run.
Small scales give large early steps and tiny late ones.
"""

import numpy as np

from brainstorm import BsoConfig, ImprovementMemory, SuccessFailureMemory, make_benchmark, run

# Two strategies that both succeeded once: the success/failure memory cannot
# tell them apart, the improvement memory favors the larger gain.
ims = ImprovementMemory(2)
ims.record([2.0, 1.0])
sf = SuccessFailureMemory(2)
sf.record([1, 1], [0, 0])
print("improvement memory:", ims.probabilities())
print("success memory:    ", sf.probabilities())

###############################################################################
# During a run the engine keeps one probability vector per iteration.

_, f = make_benchmark("sphere", 10, transform="identity")
cfg = BsoConfig(budget=30000, variant="asbso_ims")
record, trace = run(f, cfg, seed=1)
probs = np.array(trace.probability_history)
print("scales:", cfg.ladder.scales)
for it in (0, len(probs) // 4, len(probs) // 2, 3 * len(probs) // 4, len(probs) - 1):
    print(f"iteration {it:4d}:", np.round(probs[it], 3))
print("candidates per scale:", trace.strategy_counts)
