"""Brain storm optimization with memory-selected multi-scale step lengths."""

from .benchmarks import BenchmarkSpec, batch_catalog, get_benchmark, make_benchmark
from .clustering import ClusteringConfig, kmeans_partition
from .core import (Bounds, BrainstormError, ConfigurationError, ContractViolation,
                   EvaluationError, Individual, InsufficientDataError, ObjectiveFunction,
                   Population, clamp_to_bounds, evaluate_individual, rng_stream)
from .engine import VARIANTS, BsoConfig, ConvergenceTrace, TrialRecord, run
from .memory import (ImprovementMemory, OneFifthState, SuccessFailureMemory, ims_probabilities,
                     roulette_select, sfms_probabilities)
from .stats import adjust_pvalues, friedman_with_posthoc, wilcoxon_signed_rank
from .steps import StrategyLadder, base_step_length, make_ladder

__version__ = "0.1.0"
