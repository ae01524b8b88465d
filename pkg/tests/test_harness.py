import json

import numpy as np
import pytest

from brainstorm.cli import main
from brainstorm.core import InsufficientDataError
from brainstorm.engine import TrialRecord
from brainstorm.harness import (AlgorithmSpec, ExperimentManifest, ValidationError, compare,
                                default_manifest, load_manifest, read_convergence, read_summary,
                                read_trials, run_manifest, sweep)

SMALL = {"population_size": 20, "C": 3}


def small_manifest(**kw):
    base = dict(
        algorithms=[AlgorithmSpec("BSO", "classic_bso", dict(SMALL)),
                    AlgorithmSpec("ASBSO", "asbso_ims", dict(SMALL))],
        functions=["sphere"], dimensions=[4], seeds=[0, 1, 2], budget_multiplier=50)
    base.update(kw)
    return ExperimentManifest(**base)


def test_grid_cardinality_and_files(tmp_path):
    out = run_manifest(small_manifest(), tmp_path)
    trials = read_trials(out / "trials.csv")
    assert len(trials) == 6
    assert {(t.algorithm, t.seed) for t in trials} == {(a, s) for a in ("BSO", "ASBSO") for s in (0, 1, 2)}
    assert all(t.evals_used == 200 for t in trials)
    conv = read_convergence(out / "convergence.csv")
    assert set(conv) == {t.run_id for t in trials}
    for t in trials:
        evals, best = zip(*conv[t.run_id])
        assert evals[-1] == 200 and best[-1] == t.best_fitness
        assert all(np.diff(best) <= 0)
    summary = read_summary(out / "summary.csv")
    for row in summary:
        vals = [t.best_fitness for t in trials if t.algorithm == row["algorithm"]]
        assert row["mean"] == pytest.approx(np.mean(vals), rel=1e-15)
        assert row["std"] == pytest.approx(np.std(vals, ddof=1), rel=1e-12)
        assert row["min"] == min(vals) and row["max"] == max(vals)
    assert json.loads((out / "manifest.json").read_text())["seeds"] == [0, 1, 2]


def test_rerun_is_byte_identical(tmp_path):
    a = run_manifest(small_manifest(), tmp_path / "a")
    b = run_manifest(small_manifest(), tmp_path / "b")
    for name in ("trials.csv", "convergence.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_csv_round_trip_is_exact(tmp_path):
    out = run_manifest(small_manifest(), tmp_path)
    first = (out / "trials.csv").read_text()
    trials = read_trials(out / "trials.csv")
    assert all(np.isnan(t.wall_ms) for t in trials)
    from brainstorm.harness import TRIAL_COLUMNS, _write_csv
    _write_csv(tmp_path / "again.csv", TRIAL_COLUMNS,
               ([getattr(t, c) for c in TRIAL_COLUMNS] for t in trials))
    assert (tmp_path / "again.csv").read_text() == first


def test_manifest_validation_names_field():
    with pytest.raises(ValidationError, match="functions"):
        small_manifest(functions=["nope"])
    with pytest.raises(ValidationError, match="seeds"):
        small_manifest(seeds=[])
    with pytest.raises(ValidationError, match="overrides.Q"):
        small_manifest(algorithms=[AlgorithmSpec("X", "asbso_ims", {"Q": 1})])
    with pytest.raises(ValidationError, match="unknown manifest field"):
        load_manifest({"algorithms": [{"name": "A"}], "functions": ["sphere"],
                       "dimensions": [2], "bogus": 1})


def test_load_manifest_defaults():
    m = load_manifest('{"algorithms": [{"name": "A", "variant": "classic_bso"}], '
                      '"functions": "catalog", "dimensions": [10]}', seed_base=100)
    assert len(m.functions) == 14 and m.seeds == list(range(100, 130))
    d = default_manifest()
    assert len(d.functions) == 14 and d.dimensions == [10, 30] and len(d.seeds) == 30


def fake_trials(control_better=True, drop=None):
    rng = np.random.default_rng(0)
    out = []
    for k, fn in enumerate(["sphere", "rastrigin", "ackley", "griewank", "rosenbrock",
                            "schwefel_226", "weierstrass", "sphere_sr"]):
        for dim in (10, 30):
            for s in range(3):
                base = rng.uniform(1, 10)
                for alg, val in (("A", base), ("B", base * (2 if control_better else 1))):
                    if drop and (alg, fn) == drop:
                        continue
                    out.append(TrialRecord(f"{alg}|{fn}|{dim}|{s}", alg, fn, dim, s, val, 100, np.nan))
    return out


def test_compare_control_dominates(tmp_path):
    rep = compare(fake_trials(), "A", "wilcoxon", out_dir=tmp_path)
    assert [r["dim"] for r in rep["rows"]] == [10, 30]
    for r in rep["rows"]:
        assert r["R_minus"] == 0 and r["R_plus"] == 36
        assert r["alpha_0.05"] == "YES" and r["alpha_0.01"] == "YES"
    assert (tmp_path / "comparison_wilcoxon.txt").exists()
    assert json.loads((tmp_path / "comparison_wilcoxon.json").read_text())["control"] == "A"


def test_compare_identical_is_insufficient():
    with pytest.raises(InsufficientDataError):
        compare(fake_trials(control_better=False), "A", "wilcoxon")


def test_compare_missing_cells_listed():
    with pytest.raises(ValidationError, match="B lacks ackley@D10"):
        compare(fake_trials(drop=("B", "ackley")), "A", "wilcoxon")


def test_compare_friedman_order():
    rep = compare(fake_trials(), "A", "friedman", algorithm_order=["B", "A"])
    assert rep["ranking"] == {"B": 2.0, "A": 1.0}
    assert rep["rows"][0]["algorithm"] == "B"
    assert rep["rows"][0]["p_holm"] < 1e-3


def test_sweep_columns(tmp_path):
    m = small_manifest(algorithms=[AlgorithmSpec("ASBSO", "asbso_ims", dict(SMALL))],
                       functions=["sphere", "rastrigin", "griewank"], seeds=[0, 1])
    rep = sweep("H", ["10", "20", "30"], m, out_dir=tmp_path)
    assert set(rep["ranking"]) == {"H=10", "H=20", "H=30"}
    assert rep["ranking"][rep["control"]] == min(rep["ranking"].values())
    assert len(rep["rows"]) == 2
    one = sweep("H", [20], m, out_dir=tmp_path / "one")
    assert one["rows"] == [] and "single algorithm" in one["text"]
    with pytest.raises(ValidationError):
        sweep("Z", [1], m)
    with pytest.raises(ValidationError):
        sweep("M", [1.5], m)
    with pytest.raises(ValidationError, match="ignores H"):
        sweep("H", [10, 20], small_manifest())


def _write_manifest(path):
    path.write_text(json.dumps({
        "algorithms": [{"name": "ASBSO", "variant": "asbso_ims", "overrides": SMALL},
                       {"name": "BSO", "variant": "classic_bso", "overrides": SMALL}],
        "functions": ["sphere", "rastrigin", "griewank", "ackley", "rosenbrock"],
        "dimensions": [3], "n_seeds": 1, "budget_multiplier": 40}))
    return path


def test_cli_exit_codes(tmp_path, capsys):
    man = _write_manifest(tmp_path / "m.json")
    out = tmp_path / "res"
    assert main(["run", str(man), "--out", str(out)]) == 0
    assert main(["compare", str(out / "trials.csv"), "--control", "ASBSO", "--test", "friedman"]) == 0
    assert main(["compare", str(out / "trials.csv"), "--control", "nobody"]) == 2
    assert main(["compare", str(tmp_path / "missing.csv"), "--control", "A"]) == 3
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["run", str(tmp_path / "bad.json")]) == 2
    same = tmp_path / "same"
    same.mkdir()
    rows = (out / "trials.csv").read_text().splitlines()
    dup = [rows[0]] + [r for r in rows[1:] if r.startswith("ASBSO")]
    dup += [r.replace("ASBSO", "COPY", 2) for r in dup[1:]]
    (same / "trials.csv").write_text("\n".join(dup) + "\n")
    assert main(["compare", str(same / "trials.csv"), "--control", "ASBSO"]) == 4
    assert main(["catalog", "--out", str(tmp_path / "cat.json")]) == 0
    assert len(json.loads((tmp_path / "cat.json").read_text())["entries"]) == 28
    assert main(["sweep", str(man), "--param", "H", "--values", "10,30", "--out",
                 str(tmp_path / "sw")]) == 0
    assert "Friedman" in capsys.readouterr().out


@pytest.mark.slow
def test_M_sweep_rastrigin_d30(tmp_path):
    # Ladder versus single strategy on rastrigin D=30 over 10 seeds; the
    # direction is reported, not asserted.
    m = ExperimentManifest([AlgorithmSpec("ASBSO", "asbso_ims")], ["rastrigin"], [30],
                           list(range(10)), budget_multiplier=2000)
    rep = sweep("M", [1, 4], m, out_dir=tmp_path)
    print(f"M sweep rastrigin D=30 ranking: {rep['ranking']}")
    assert set(rep["ranking"]) == {"M=1", "M=4"}
