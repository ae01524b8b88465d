"""Shared domain types: bounds, individuals, objectives and seeded random streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

__all__ = [
    "BrainstormError",
    "ConfigurationError",
    "ContractViolation",
    "EvaluationError",
    "InsufficientDataError",
    "Bounds",
    "Individual",
    "Population",
    "ObjectiveFunction",
    "EvaluationCounter",
    "StreamLabel",
    "rng_stream",
    "make_streams",
    "clamp_to_bounds",
    "evaluate_individual",
]


class BrainstormError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(BrainstormError, ValueError):
    """An invalid parameter or configuration value."""


class ContractViolation(BrainstormError, ValueError):
    """A precondition of an operation was not met."""


class EvaluationError(BrainstormError, ArithmeticError):
    """The objective returned a non-finite value."""


class InsufficientDataError(BrainstormError, ValueError):
    """Not enough usable samples for a statistical test."""


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ConfigurationError("lower and upper must be 1-D vectors of equal length")
        if lower.size < 1:
            raise ConfigurationError("bounds need at least one dimension")
        if not np.all(lower < upper):
            raise ConfigurationError("lower[i] < upper[i] must hold for every dimension")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, low: float, high: float, dim: int) -> "Bounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
        """Draw uniform points; shape ``(D,)`` when `n` is None, else ``(n, D)``."""
        shape = (self.dim,) if n is None else (n, self.dim)
        return self.lower + rng.random(shape) * self.width


@dataclass
class Individual:
    position: np.ndarray
    fitness: float


@dataclass
class Population:
    """Positions and fitness of all members plus the current cluster structure.

    ``centers[c]`` is the index of the best member of cluster ``c``; it is
    only meaningful after clustering.
    """

    positions: np.ndarray
    fitness: np.ndarray
    cluster_assignment: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    centers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.centers.size

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_assignment == cluster)

    def best_index(self) -> int:
        return int(np.argmin(self.fitness))

    def individual(self, i: int) -> Individual:
        return Individual(self.positions[i].copy(), float(self.fitness[i]))


class ObjectiveFunction:
    """A deterministic scalar objective on a bounded box (minimization).

    Parameters
    ----------
    func : callable
        Maps a 1-D array of length D to a float.
    bounds : Bounds
        Search domain.
    name : str, optional
        Used in error messages and result files.
    batch : callable, optional
        Vectorized variant mapping an ``(n, D)`` array to ``n`` values.
        When omitted, rows are evaluated one at a time with `func`.
    """

    def __init__(self, func: Callable[[np.ndarray], float], bounds: Bounds,
                 name: str = "objective", batch: Optional[Callable] = None):
        self.func = func
        self.bounds = bounds
        self.name = name
        self._batch = batch

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def evaluate(self, x) -> float:
        return float(self.func(np.asarray(x, dtype=float)))

    def evaluate_batch(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self._batch is not None:
            return np.asarray(self._batch(xs), dtype=float).reshape(xs.shape[0])
        return np.array([self.func(x) for x in xs], dtype=float)

    def __call__(self, x) -> float:
        return self.evaluate(x)

    def __repr__(self):
        return f"ObjectiveFunction({self.name!r}, dim={self.dim})"


class EvaluationCounter:
    """Counts objective calls and rejects non-finite values."""

    def __init__(self, objective: ObjectiveFunction):
        self.objective = objective
        self.count = 0

    def _check(self, values, xs):
        bad = ~np.isfinite(values)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise EvaluationError(
                f"{self.objective.name} returned {values[i]!r} at x={np.asarray(xs)[i]!r}")

    def __call__(self, x) -> float:
        value = self.objective.evaluate(x)
        self.count += 1
        self._check(np.array([value]), [x])
        return value

    def batch(self, xs) -> np.ndarray:
        xs = np.atleast_2d(xs)
        values = self.objective.evaluate_batch(xs)
        self.count += xs.shape[0]
        self._check(values, xs)
        return values


class StreamLabel(Enum):
    INIT = 0
    CLUSTERING = 1
    SELECTION = 2
    STRATEGY = 3
    MUTATION = 4
    REPLACEMENT = 5


def rng_stream(seed: int, label: StreamLabel) -> np.random.Generator:
    """Generator for one stochastic role of a run.

    Equal ``(seed, label)`` pairs give equal sequences; different labels get
    independent ``SeedSequence`` children.
    """
    if isinstance(label, str):
        label = StreamLabel[label.upper()]
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(label.value,))
    return np.random.Generator(np.random.PCG64(ss))


def make_streams(seed: int) -> dict:
    """One generator per `StreamLabel`, keyed by the lower-case label name."""
    return {lab.name.lower(): rng_stream(seed, lab) for lab in StreamLabel}


def clamp_to_bounds(position, bounds: Bounds) -> np.ndarray:
    """Project `position` (one vector or a stack of rows) onto the box."""
    position = np.asarray(position, dtype=float)
    if position.shape[-1] != bounds.dim:
        raise ContractViolation(
            f"position has length {position.shape[-1]}, bounds have {bounds.dim}")
    return np.minimum(bounds.upper, np.maximum(bounds.lower, position))


def evaluate_individual(x, f, counter: Optional[EvaluationCounter] = None) -> Individual:
    """Evaluate `x` on `f` and wrap it as an `Individual`.

    When a `counter` is given the call goes through it, so it is counted and
    checked for finiteness; otherwise the finiteness check is done here.
    """
    x = np.asarray(x, dtype=float)
    if counter is not None:
        value = counter(x)
    else:
        value = f.evaluate(x)
        if not np.isfinite(value):
            raise EvaluationError(f"{getattr(f, 'name', f)} returned {value!r} at x={x!r}")
    return Individual(x.copy(), float(value))
