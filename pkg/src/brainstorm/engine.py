"""Brain storm optimization loop and its adaptive-step variants.

All four variants share one loop and differ only in where the step comes from:

``classic_bso``
    fixed logsig scale (20).
``asbso_ims``
    scale drawn from a ladder by an improvement memory.
``asbso_sfms``
    scale drawn from a ladder by a success/failure memory.
``bso_one_fifth``
    the logsig step is replaced by ``N(0, sigma)`` with sigma adapted by
    the 1/5 success rule.

An iteration clusters the population, optionally swaps one cluster center for
a random point, then generates one candidate per population slot from the
iteration-start population. Candidate ``i`` replaces member ``i`` only when
strictly better.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .clustering import ClusteringConfig, kmeans_partition
from .core import (Bounds, ConfigurationError, ContractViolation, EvaluationCounter,
                   Individual, Population, clamp_to_bounds, make_streams)
from .memory import (DELTA, ImprovementMemory, OneFifthState, SuccessFailureMemory,
                     one_fifth_record, one_fifth_step, roulette_select)
from .steps import CLASSIC_SCALE, StrategyLadder, make_ladder, step_schedule

__all__ = [
    "VARIANTS",
    "BsoConfig",
    "ConvergenceTrace",
    "TrialRecord",
    "select_bases",
    "select_base_individual",
    "generate_candidates",
    "generate_candidate",
    "max_iterations",
    "run",
]

log = logging.getLogger(__name__)

VARIANTS = ("classic_bso", "asbso_ims", "asbso_sfms", "bso_one_fifth")

# columns of the per-candidate uniform block drawn from the selection stream
_U_BRANCH, _U_SUB, _U_CLUSTER_A, _U_CLUSTER_B, _U_MEMBER_A, _U_MEMBER_B, _U_WEIGHT = range(7)
N_SELECTION_UNIFORMS = 7


@dataclass(frozen=True)
class BsoConfig:
    """Run parameters.

    ``p_c`` is the probability of replacing a cluster center with a random
    point each iteration; ``p_g`` of building the base from one cluster
    rather than two; ``p_c1`` of using the center (not a random member) in
    the one-cluster case; ``p_c2`` of combining the two centers (not two
    random members) in the two-cluster case.
    """

    budget: int
    population_size: int = 100
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    p_c: float = 0.2
    p_g: float = 0.8
    p_c1: float = 0.4
    p_c2: float = 0.5
    variant: str = "asbso_ims"
    ladder: StrategyLadder = field(default_factory=make_ladder)
    memory_length: int = 50
    delta: float = DELTA
    classic_scale: float = CLASSIC_SCALE
    one_fifth_r: float = 0.9
    one_fifth_epoch: int = 50
    one_fifth_sigma0: Optional[float] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        for name in ("p_c", "p_g", "p_c1", "p_c2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name}={v} outside [0, 1]")
        if self.population_size < 1:
            raise ConfigurationError("population_size must be >= 1")
        if self.clustering.n_clusters > self.population_size:
            raise ConfigurationError("more clusters than population members")
        if self.budget < self.population_size:
            raise ConfigurationError(
                f"budget {self.budget} cannot cover the initial population of {self.population_size}")
        if self.memory_length < 1:
            raise ConfigurationError("memory_length must be >= 1")
        if not self.classic_scale > 0:
            raise ConfigurationError("classic_scale must be positive")
        if self.one_fifth_sigma0 is not None and not self.one_fifth_sigma0 > 0:
            raise ConfigurationError("one_fifth_sigma0 must be positive")

    def with_(self, **changes) -> "BsoConfig":
        return replace(self, **changes)


@dataclass
class ConvergenceTrace:
    """Best-so-far fitness sampled after initialization and after every iteration."""

    evaluations: list = field(default_factory=list)
    best_fitness: list = field(default_factory=list)
    final_best: Optional[Individual] = None
    iterations: int = 0
    strategy_counts: Optional[np.ndarray] = None
    probability_history: list = field(default_factory=list, repr=False)
    fallbacks: int = 0
    memory_rows: int = 0

    def append(self, evals: int, best: float):
        self.evaluations.append(int(evals))
        self.best_fitness.append(float(best))

    @property
    def samples(self):
        return list(zip(self.evaluations, self.best_fitness))

    def __eq__(self, other):
        if not isinstance(other, ConvergenceTrace):
            return NotImplemented
        return (self.evaluations == other.evaluations
                and self.best_fitness == other.best_fitness
                and np.array_equal(self.final_best.position, other.final_best.position)
                and self.final_best.fitness == other.final_best.fitness)


@dataclass
class TrialRecord:
    run_id: str
    algorithm: str
    function: str
    dim: int
    seed: int
    best_fitness: float
    evals_used: int
    wall_ms: float


def max_iterations(budget: int, population_size: int) -> int:
    """Iteration count used by the logsig schedule; the last may be partial."""
    return (budget - population_size) // population_size + 1


def select_bases(population: Population, cfg: BsoConfig, rng, n: int,
                 center_positions=None, uniforms=None):
    """Build `n` base vectors by the cluster/center selection rules.

    Parameters
    ----------
    population : Population
        Clustered population.
    cfg : BsoConfig
        Supplies ``p_g``, ``p_c1`` and ``p_c2``.
    rng : numpy.random.Generator
        Selection stream; ``n * 7`` uniforms are consumed, one row per base.
    n : int
    center_positions : ndarray, optional
        ``(C, D)`` center vectors, defaults to the positions of
        ``population.centers``. Passed explicitly when a center was
        swapped for a random point.
    uniforms : ndarray, optional
        ``(n, 7)`` block to use instead of drawing from `rng`.

    Returns
    -------
    bases : ndarray, shape (n, D)
    two_cluster : ndarray of bool
        Whether each base came from the two-cluster branch.
    fallbacks : int
        Two-cluster draws demoted to one cluster because ``C < 2``.
    """
    if population.n_clusters < 1:
        raise ContractViolation("population must be clustered before selection")
    pos = population.positions
    centers = pos[population.centers] if center_positions is None else np.asarray(center_positions)
    C = population.n_clusters
    u = rng.random((n, N_SELECTION_UNIFORMS)) if uniforms is None else np.asarray(uniforms, float)
    # members of cluster c are order[starts[c]:starts[c] + sizes[c]]
    order = np.argsort(population.cluster_assignment, kind="stable")
    sizes = np.bincount(population.cluster_assignment, minlength=C)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))

    def pick_member(cluster, col):
        idx = np.minimum((u[:, col] * sizes[cluster]).astype(int), sizes[cluster] - 1)
        return order[starts[cluster] + idx]

    two = u[:, _U_BRANCH] >= cfg.p_g
    fallbacks = int(two.sum()) if C < 2 else 0
    if C < 2:
        two[:] = False

    ca = np.minimum((u[:, _U_CLUSTER_A] * C).astype(int), C - 1)
    use_center = np.where(two, u[:, _U_SUB] < cfg.p_c2, u[:, _U_SUB] < cfg.p_c1)
    xa = np.where(use_center[:, None], centers[ca], pos[pick_member(ca, _U_MEMBER_A)])
    bases = xa
    if np.any(two):
        cb = np.minimum((u[:, _U_CLUSTER_B] * (C - 1)).astype(int), max(C - 2, 0))
        cb = cb + (cb >= ca)
        cb = np.minimum(cb, C - 1)
        xb = np.where(use_center[:, None], centers[cb], pos[pick_member(cb, _U_MEMBER_B)])
        w = u[:, _U_WEIGHT, None]
        combined = w * xa + (1.0 - w) * xb
        bases = np.where(two[:, None], combined, xa)
    return bases, two, fallbacks


def select_base_individual(population: Population, cfg: BsoConfig, rng,
                           center_positions=None) -> np.ndarray:
    """Single-base form of `select_bases`."""
    bases, _, fallbacks = select_bases(population, cfg, rng, 1, center_positions)
    if fallbacks:
        log.debug("two-cluster branch drawn with one cluster; used one-cluster branch")
    return bases[0]


def generate_candidates(X, xi, bounds: Bounds, rng) -> np.ndarray:
    """Rows ``X + xi * N(0, I)`` clamped to the box; one normal per coordinate."""
    X = np.atleast_2d(X)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (X.shape[0],))
    g = rng.standard_normal(X.shape)
    return clamp_to_bounds(X + xi[:, None] * g, bounds)


def generate_candidate(X, xi: float, bounds: Bounds, rng) -> np.ndarray:
    return generate_candidates(np.asarray(X, float)[None, :], xi, bounds, rng)[0]


def _make_memory(cfg: BsoConfig):
    m = cfg.ladder.count
    if cfg.variant == "asbso_ims":
        return ImprovementMemory(m, cfg.memory_length, cfg.delta)
    if cfg.variant == "asbso_sfms":
        return SuccessFailureMemory(m, cfg.memory_length, cfg.delta)
    return None


def run(f, cfg: BsoConfig, seed: int, algorithm: Optional[str] = None,
        run_id: Optional[str] = None):
    """Minimize `f` within ``cfg.budget`` evaluations.

    Parameters
    ----------
    f : ObjectiveFunction
    cfg : BsoConfig
    seed : int
        Seeds every random stream of the run; equal seeds give identical runs.
    algorithm, run_id : str, optional
        Labels copied into the returned record.

    Returns
    -------
    record : TrialRecord
    trace : ConvergenceTrace
    """
    t0 = time.perf_counter()
    bounds = f.bounds
    N, D = cfg.population_size, bounds.dim
    streams = make_streams(seed)
    counter = EvaluationCounter(f)

    pos = bounds.sample(streams["init"], N)
    fit = counter.batch(pos)
    trace = ConvergenceTrace()
    trace.append(counter.count, fit.min())

    n_iter = max_iterations(cfg.budget, N)
    memory = _make_memory(cfg)
    if cfg.variant == "classic_bso":
        scales = np.array([cfg.classic_scale])
    else:
        scales = cfg.ladder.scales
    trace.strategy_counts = np.zeros(scales.size, dtype=np.int64)
    one_fifth = None
    if cfg.variant == "bso_one_fifth":
        sigma0 = cfg.one_fifth_sigma0 or 0.1 * float(np.mean(bounds.width))
        one_fifth = OneFifthState(sigma0, cfg.one_fifth_r, cfg.one_fifth_epoch)

    it = 0
    while counter.count < cfg.budget:
        it += 1
        n_gen = min(N, cfg.budget - counter.count)
        pop = kmeans_partition(Population(pos, fit), cfg.clustering, streams["clustering"])
        center_pos = pos[pop.centers].copy()
        rep = streams["replacement"]
        if rep.random() < cfg.p_c:
            c = int(rep.integers(pop.n_clusters))
            center_pos[c] = bounds.sample(rep)

        bases, _, fallbacks = select_bases(pop, cfg, streams["selection"], n_gen, center_pos)
        if fallbacks:
            trace.fallbacks += fallbacks
            log.debug("iteration %d: %d two-cluster draws fell back to one cluster", it, fallbacks)

        if one_fifth is not None:
            strat = np.zeros(n_gen, dtype=int)
            step = one_fifth_step(one_fifth, streams["mutation"], D, size=n_gen)
            cand = clamp_to_bounds(bases + step, bounds)
        else:
            probs = memory.probabilities() if memory is not None else np.ones(1)
            trace.probability_history.append(probs)
            srng = streams["strategy"]
            strat = roulette_select(probs, srng, size=n_gen)
            u = srng.random(n_gen)
            xi = step_schedule(n_iter, it, scales[strat]) * u
            cand = generate_candidates(bases, xi, bounds, streams["mutation"])

        cfit = counter.batch(cand)
        old = fit[:n_gen]
        better = cfit < old
        gain = np.where(better, old - cfit, 0.0)
        slots = np.flatnonzero(better)
        pos[slots] = cand[slots]
        fit[slots] = cfit[slots]

        m = scales.size
        trace.strategy_counts += np.bincount(strat, minlength=m)
        if isinstance(memory, ImprovementMemory):
            memory.record(np.bincount(strat, weights=gain, minlength=m))
            trace.memory_rows += 1
        elif isinstance(memory, SuccessFailureMemory):
            memory.record(np.bincount(strat[better], minlength=m),
                          np.bincount(strat[~better], minlength=m))
            trace.memory_rows += 1
        elif one_fifth is not None:
            one_fifth_record(one_fifth, better)
        trace.append(counter.count, fit.min())

    best = int(np.argmin(fit))
    trace.final_best = Individual(pos[best].copy(), float(fit[best]))
    trace.iterations = it
    wall_ms = (time.perf_counter() - t0) * 1000.0
    fname = getattr(f, "name", "objective")
    algorithm = algorithm or cfg.variant
    record = TrialRecord(
        run_id=run_id or f"{algorithm}|{fname}|{D}|{seed}",
        algorithm=algorithm,
        function=fname,
        dim=D,
        seed=int(seed),
        best_fitness=float(fit[best]),
        evals_used=counter.count,
        wall_ms=wall_ms,
    )
    return record, trace
