"""Logsig step-length schedule and the ladder of scale parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import ConfigurationError, ContractViolation

__all__ = ["StrategyLadder", "make_ladder", "logsig", "step_schedule", "base_step_length",
           "CLASSIC_SCALE"]

# fixed scale used by the original algorithm
CLASSIC_SCALE = 20.0


@dataclass(frozen=True)
class StrategyLadder:
    """Scales ``K_j = base + j * increment`` for ``j = 0 .. count-1``."""

    base: float
    increment: float
    count: int

    @property
    def scales(self) -> np.ndarray:
        return self.base + self.increment * np.arange(self.count, dtype=float)

    def __len__(self):
        return self.count


def make_ladder(k: float = 10.0, H: float = 20.0, M: int = 4) -> StrategyLadder:
    """Build the ladder ``(k, k+H, ..., k+(M-1)H)``.

    >>> make_ladder(10, 20, 4).scales
    array([10., 30., 50., 70.])
    """
    if not k > 0:
        raise ConfigurationError(f"base scale k must be positive, got {k}")
    if not H > 0:
        raise ConfigurationError(f"increment H must be positive, got {H}")
    if int(M) != M or M < 1:
        raise ConfigurationError(f"strategy count M must be a positive integer, got {M}")
    return StrategyLadder(float(k), float(H), int(M))


def logsig(x):
    """Logistic sigmoid ``1 / (1 + exp(-x))``."""
    return expit(x)


def step_schedule(max_iter, cur_iter, K):
    """Deterministic part of the step length, ``logsig((max_iter/2 - cur_iter)/K)``.

    Broadcasts over `K`.
    """
    return logsig((max_iter / 2.0 - cur_iter) / np.asarray(K, dtype=float))


def _check(max_iter, cur_iter, K):
    if not 1 <= cur_iter <= max_iter:
        raise ContractViolation(f"need 1 <= cur_iter <= max_iter, got {cur_iter}, {max_iter}")
    if np.any(np.asarray(K) <= 0):
        raise ContractViolation("scale K must be positive")


def base_step_length(max_iter: int, cur_iter: int, K: float, rng) -> float:
    """Random step length ``logsig((max_iter/2 - cur_iter)/K) * u``.

    ``u`` is one uniform draw from `rng`, taken once per generated individual.
    """
    _check(max_iter, cur_iter, K)
    return float(step_schedule(max_iter, cur_iter, K) * rng.random())
