import numpy as np
import pytest

from brainstorm.benchmarks import make_benchmark
from brainstorm.clustering import ClusteringConfig
from brainstorm.core import Bounds, ConfigurationError, ObjectiveFunction, Population
from brainstorm.engine import (VARIANTS, BsoConfig, generate_candidate, max_iterations, run,
                               select_base_individual, select_bases)
from brainstorm.steps import make_ladder

# uniform columns: branch, sub-branch, cluster a, cluster b, member a, member b, weight


def clustered(n_clusters=2):
    pos = np.array([[0.0, 0.0], [0.5, 0.5], [2.0, 2.0], [3.0, 3.0]])
    fit = np.array([1.0, 2.0, 0.5, 4.0])
    if n_clusters == 1:
        return Population(pos, fit, np.zeros(4, dtype=int), np.array([2]))
    return Population(pos, fit, np.array([0, 0, 1, 1]), np.array([0, 2]))


CFG = BsoConfig(budget=100, population_size=4, clustering=ClusteringConfig(n_clusters=2))


def test_one_cluster_center(stub_rng):
    # p_g branch, p_c1 branch, cluster 1 -> center of cluster 1
    u = [0.1, 0.1, 0.9, 0.0, 0.0, 0.0, 0.0]
    x = select_base_individual(clustered(), CFG, stub_rng(u))
    np.testing.assert_array_equal(x, [2.0, 2.0])


def test_one_cluster_random_member(stub_rng):
    u = [0.1, 0.9, 0.0, 0.0, 0.99, 0.0, 0.0]
    x = select_base_individual(clustered(), CFG, stub_rng(u))
    np.testing.assert_array_equal(x, [0.5, 0.5])


def test_two_centers_midpoint(stub_rng):
    u = [0.9, 0.1, 0.0, 0.0, 0.0, 0.0, 0.5]
    centers = np.array([[0.0, 0.0], [2.0, 2.0]])
    x = select_base_individual(clustered(), CFG, stub_rng(u), center_positions=centers)
    np.testing.assert_array_equal(x, [1.0, 1.0])


def test_two_random_members(stub_rng):
    # cluster a = 1, cluster b = 0 (b index skips a), members: last of 1, last of 0
    u = [0.9, 0.9, 0.6, 0.0, 0.99, 0.99, 0.25]
    x = select_base_individual(clustered(), CFG, stub_rng(u))
    np.testing.assert_allclose(x, 0.25 * np.array([3.0, 3.0]) + 0.75 * np.array([0.5, 0.5]))


def test_two_clusters_always_distinct():
    pop = clustered()
    u = np.random.default_rng(0).random((2000, 7))
    u[:, 0] = 0.95
    u[:, 1] = 0.0
    bases, two, _ = select_bases(pop, CFG, None, 2000, uniforms=u)
    assert two.all()
    w = u[:, 6]
    # a = first cluster drawn; the other center always gets weight 1 - w
    ca = np.minimum((u[:, 2] * 2).astype(int), 1)
    expected = np.where(ca == 0, 2 * (1 - w), 2 * w)
    np.testing.assert_allclose(bases[:, 0], bases[:, 1])
    np.testing.assert_allclose(bases[:, 0], expected)


def test_single_cluster_forces_one_cluster_branch(stub_rng):
    u = [0.95, 0.1, 0.0, 0.0, 0.0, 0.0, 0.5]
    bases, two, fallbacks = select_bases(clustered(1), CFG, stub_rng(u), 1)
    assert not two.any() and fallbacks == 1
    np.testing.assert_array_equal(bases[0], [2.0, 2.0])


def test_generate_candidate_examples(stub_rng):
    b = Bounds.uniform(-10, 10, 2)
    np.testing.assert_array_equal(generate_candidate([0, 0], 0.5, b, stub_rng(normals=[1, -1])),
                                  [0.5, -0.5])
    x = np.array([1.0, -3.0])
    np.testing.assert_array_equal(generate_candidate(x, 0.0, b, np.random.default_rng(0)), x)
    top = np.array([10.0, 10.0])
    np.testing.assert_array_equal(generate_candidate(top, 0.9, b, stub_rng(normals=[2, 3])), top)


def sphere(d):
    return make_benchmark("sphere", d, transform="identity")[1]


def test_budget_equal_population_returns_initial_best():
    f = sphere(2)
    rec, tr = run(f, BsoConfig(budget=10, population_size=10, variant="asbso_ims"), 5)
    assert tr.iterations == 0 and rec.evals_used == 10
    assert tr.samples == [(10, rec.best_fitness)]
    assert f(tr.final_best.position) == rec.best_fitness


def test_budget_below_population_rejected():
    with pytest.raises(ConfigurationError):
        BsoConfig(budget=9, population_size=10)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("budget", [1000, 1037])
def test_evaluation_accounting_and_monotone_trace(variant, budget):
    calls = []

    def f(x):
        calls.append(1)
        return float(np.sum(x ** 2))

    obj = ObjectiveFunction(f, Bounds.uniform(-5, 5, 3), name="counted")
    cfg = BsoConfig(budget=budget, population_size=20, variant=variant)
    rec, tr = run(obj, cfg, 11)
    assert len(calls) == rec.evals_used == budget
    assert tr.evaluations[-1] == budget
    assert all(np.diff(tr.best_fitness) <= 0)
    assert tr.iterations == -(-(budget - 20) // 20)
    assert tr.iterations <= max_iterations(budget, 20)
    if variant in ("asbso_ims", "asbso_sfms"):
        assert tr.memory_rows == tr.iterations
    assert obj.bounds.contains(tr.final_best.position)


def test_runs_are_reproducible():
    f = make_benchmark("rastrigin", 5, seed=2)[1]
    cfg = BsoConfig(budget=3000, population_size=30)
    assert run(f, cfg, 4)[1] == run(f, cfg, 4)[1]
    assert run(f, cfg, 4)[1] != run(f, cfg, 5)[1]


def test_degenerate_ladder_matches_classic():
    f = sphere(10)
    cfg = BsoConfig(budget=5000, population_size=50)
    classic = run(f, cfg.with_(variant="classic_bso"), 9)[1]
    single = run(f, cfg.with_(variant="asbso_ims", ladder=make_ladder(20, 20, 1)), 9)[1]
    assert classic == single


def test_strategy_counts_cover_every_generation():
    f = sphere(4)
    rec, tr = run(f, BsoConfig(budget=2000, population_size=25), 1)
    assert tr.strategy_counts.sum() == rec.evals_used - 25
    assert len(tr.probability_history) == tr.iterations


def test_asbso_solves_sphere():
    f = sphere(10)
    for seed in range(3):
        rec, _ = run(f, BsoConfig(budget=50_000), seed)
        assert rec.best_fitness < 1e-6


def test_one_fifth_sigma_default_and_override():
    f = sphere(3)
    run(f, BsoConfig(budget=500, population_size=10, variant="bso_one_fifth",
                     one_fifth_sigma0=0.5), 0)
    with pytest.raises(ConfigurationError):
        BsoConfig(budget=500, variant="bso_one_fifth", one_fifth_sigma0=-1.0)
    with pytest.raises(ConfigurationError):
        BsoConfig(budget=500, variant="nope")
    with pytest.raises(ConfigurationError):
        BsoConfig(budget=500, p_g=1.5)
