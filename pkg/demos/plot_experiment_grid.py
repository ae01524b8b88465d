"""
Running an experiment grid
==========================

Describe a small grid in a manifest, run it, and compare the algorithms.
The same steps are available from the shell as ``brainstorm run`` and
``brainstorm compare``.
"""

import tempfile
from pathlib import Path

from brainstorm.harness import compare, load_manifest, read_summary, run_manifest, sweep

manifest = load_manifest({
    "algorithms": [
        {"name": "BSO", "variant": "classic_bso", "overrides": {"population_size": 40}},
        {"name": "ASBSO", "variant": "asbso_ims", "overrides": {"population_size": 40}},
    ],
    "functions": ["sphere_sr", "rosenbrock_sr", "rastrigin_sr", "griewank_sr", "ackley_sr"],
    "dimensions": [5],
    "n_seeds": 3,
    "budget_multiplier": 400,
})

out = Path(tempfile.mkdtemp())
run_manifest(manifest, out)
for row in read_summary(out / "summary.csv"):
    print(f"{row['algorithm']:6s} {row['function']:14s} mean {row['mean']:.4g}")

###############################################################################
# Signed-rank comparison with ASBSO as the control.

print(compare(out / "trials.csv", "ASBSO", "wilcoxon")["text"])

###############################################################################
# Sweep the ladder increment of the adaptive variant and rank the values.
# A sweep varies the first algorithm of its manifest.

manifest.algorithms = manifest.algorithms[1:]
print(sweep("H", [10, 20, 30], manifest, out_dir=out / "sweep")["text"])
