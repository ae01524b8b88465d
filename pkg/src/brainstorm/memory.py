"""Strategy-selection memories and the 1/5 success rule.

Two sliding-window memories assign selection probabilities to the M step
strategies:

* `ImprovementMemory` keeps, per iteration, the summed fitness improvement
  each strategy achieved and selects proportionally to the windowed sums.
* `SuccessFailureMemory` keeps success and failure counts and selects
  proportionally to the windowed success rate.

Both add a floor ``delta`` to every score so no strategy is ever starved
and an empty window yields a uniform distribution.

`OneFifthState` replaces the logsig step entirely by an isotropic Gaussian
whose deviation is adapted with Rechenberg's rule.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigurationError, ContractViolation

__all__ = [
    "DELTA",
    "ImprovementMemory",
    "SuccessFailureMemory",
    "OneFifthState",
    "ims_record",
    "ims_probabilities",
    "sfms_record",
    "sfms_probabilities",
    "roulette_select",
    "one_fifth_step",
    "one_fifth_record",
    "one_fifth_update",
]

DELTA = 0.01
_SIGMA_FLOOR = np.finfo(float).tiny


class ImprovementMemory:
    """FIFO of per-iteration improvement rows, at most `length` rows kept."""

    def __init__(self, n_strategies: int, length: int = 50, delta: float = DELTA):
        if n_strategies < 1 or length < 1:
            raise ConfigurationError("need n_strategies >= 1 and length >= 1")
        if delta < 0:
            raise ConfigurationError("delta must be non-negative")
        self.n_strategies = int(n_strategies)
        self.length = int(length)
        self.delta = float(delta)
        self.rows = deque(maxlen=self.length)

    def __len__(self):
        return len(self.rows)

    def column_sums(self) -> np.ndarray:
        if not self.rows:
            return np.zeros(self.n_strategies)
        return np.sum(self.rows, axis=0)

    def record(self, improvements) -> "ImprovementMemory":
        return ims_record(self, improvements)

    def probabilities(self) -> np.ndarray:
        return ims_probabilities(self)


def ims_record(memory: ImprovementMemory, iteration_improvements) -> ImprovementMemory:
    """Append one iteration's per-strategy improvement sums (oldest row evicted at capacity)."""
    row = np.array(iteration_improvements, dtype=float)
    if row.shape != (memory.n_strategies,):
        raise ContractViolation(f"expected {memory.n_strategies} improvements, got shape {row.shape}")
    if np.any(row < 0) or not np.all(np.isfinite(row)):
        raise ContractViolation("improvements must be finite and non-negative")
    memory.rows.append(row)
    return memory


def ims_probabilities(memory: ImprovementMemory) -> np.ndarray:
    score = memory.column_sums() + memory.delta
    total = score.sum()
    if total <= 0:
        # delta == 0 and nothing recorded
        return np.full(memory.n_strategies, 1.0 / memory.n_strategies)
    return score / total


class SuccessFailureMemory:
    """Paired FIFOs of success and failure counts, evicted in lockstep."""

    def __init__(self, n_strategies: int, length: int = 50, delta: float = DELTA):
        if n_strategies < 1 or length < 1:
            raise ConfigurationError("need n_strategies >= 1 and length >= 1")
        self.n_strategies = int(n_strategies)
        self.length = int(length)
        self.delta = float(delta)
        self.successes = deque(maxlen=self.length)
        self.failures = deque(maxlen=self.length)

    def __len__(self):
        return len(self.successes)

    def totals(self):
        if not self.successes:
            z = np.zeros(self.n_strategies, dtype=np.int64)
            return z, z.copy()
        return np.sum(self.successes, axis=0), np.sum(self.failures, axis=0)

    def record(self, successes, failures) -> "SuccessFailureMemory":
        return sfms_record(self, successes, failures)

    def probabilities(self) -> np.ndarray:
        return sfms_probabilities(self)


def sfms_record(memory: SuccessFailureMemory, successes, failures) -> SuccessFailureMemory:
    """Append matching success and failure count rows."""
    a = np.asarray(successes)
    b = np.asarray(failures)
    shape = (memory.n_strategies,)
    if a.shape != shape or b.shape != shape:
        raise ContractViolation(f"count rows must have shape {shape}")
    if np.any(a < 0) or np.any(b < 0) or np.any(a != np.round(a)) or np.any(b != np.round(b)):
        raise ContractViolation("counts must be non-negative integers")
    memory.successes.append(a.astype(np.int64))
    memory.failures.append(b.astype(np.int64))
    return memory


def sfms_probabilities(memory: SuccessFailureMemory) -> np.ndarray:
    a, b = memory.totals()
    trials = a + b
    rate = np.divide(a, trials, out=np.zeros(memory.n_strategies), where=trials > 0)
    score = rate + memory.delta
    total = score.sum()
    if total <= 0:
        return np.full(memory.n_strategies, 1.0 / memory.n_strategies)
    return score / total


def _cumulative(probabilities):
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ContractViolation(f"invalid probability vector {p!r}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ContractViolation(f"probabilities sum to {p.sum()!r}, not 1")
    return np.cumsum(p)


def roulette_select(probabilities, rng, size=None):
    """Draw strategy indices (0-based) by inverting the cumulative distribution.

    One uniform per draw. With ``size=None`` a single int is returned,
    otherwise an integer array of that length.
    """
    cdf = _cumulative(probabilities)
    u = rng.random() if size is None else rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    # guards u beyond cdf[-1] when the sum is a hair under 1
    idx = np.minimum(idx, cdf.size - 1)
    if size is None:
        return int(idx)
    return idx


@dataclass
class OneFifthState:
    """Gaussian deviation adapted by the 1/5 success rule.

    ``sigma`` grows by ``1/r`` when more than a fifth of an epoch's trials
    succeed and shrinks by ``r`` when fewer do.
    """

    sigma: float
    r: float = 0.9
    epoch_length: int = 50
    successes: int = 0
    trials: int = 0
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if not 0.85 <= self.r <= 0.99:
            raise ConfigurationError("r must lie in [0.85, 0.99]")
        if self.epoch_length < 1:
            raise ConfigurationError("epoch_length must be >= 1")


def one_fifth_step(state: OneFifthState, rng, D: int, size=None) -> np.ndarray:
    """Gaussian perturbation with mean 0 and deviation ``state.sigma`` per coordinate."""
    shape = (D,) if size is None else (size, D)
    return state.sigma * rng.standard_normal(shape)


def one_fifth_update(state: OneFifthState) -> OneFifthState:
    """Close the epoch: rescale sigma by the observed success rate and reset counters."""
    if state.trials != state.epoch_length:
        raise ContractViolation(
            f"epoch incomplete: {state.trials} of {state.epoch_length} trials")
    rate = state.successes / state.trials
    if rate > 0.2:
        state.sigma = state.sigma / state.r
    elif rate < 0.2:
        # floor keeps sigma > 0 after long runs of failures
        state.sigma = max(state.sigma * state.r, _SIGMA_FLOOR)
    state.history.append(rate)
    state.successes = 0
    state.trials = 0
    return state


def one_fifth_record(state: OneFifthState, outcomes) -> OneFifthState:
    """Feed trial outcomes in order, closing every epoch as it fills."""
    for ok in outcomes:
        state.trials += 1
        state.successes += bool(ok)
        if state.trials == state.epoch_length:
            one_fifth_update(state)
    return state
