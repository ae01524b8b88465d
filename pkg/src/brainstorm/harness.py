"""Experiment grids: run algorithms over benchmarks and seeds, write CSVs, compare.

Files written by `run_manifest`::

    trials.csv       run_id, algorithm, function, dim, seed, best_fitness, evals_used, wall_ms
    convergence.csv  run_id, evals, best_fitness
    summary.csv      algorithm, function, dim, mean, std, min, median, max

Rows are sorted by (algorithm, function, dim, seed) so the output does not
depend on the worker count. Floats are written with ``repr`` and read back
exactly. ``wall_ms`` is left empty unless the manifest sets
``"record_wall_time": true``, since timings would break byte-identical reruns.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import BASE_FUNCTIONS, CATALOG_SEED, get_benchmark
from .clustering import ClusteringConfig
from .core import ConfigurationError, InsufficientDataError
from .engine import VARIANTS, BsoConfig, TrialRecord, run
from .stats import friedman_with_posthoc, wilcoxon_signed_rank
from .steps import make_ladder

__all__ = [
    "ValidationError",
    "AlgorithmSpec",
    "ExperimentManifest",
    "TRIAL_COLUMNS",
    "CONVERGENCE_COLUMNS",
    "SUMMARY_COLUMNS",
    "SWEEP_PARAMETERS",
    "default_manifest",
    "load_manifest",
    "build_config",
    "run_manifest",
    "read_trials",
    "read_convergence",
    "read_summary",
    "compare",
    "sweep",
]

TRIAL_COLUMNS = ["run_id", "algorithm", "function", "dim", "seed", "best_fitness",
                 "evals_used", "wall_ms"]
CONVERGENCE_COLUMNS = ["run_id", "evals", "best_fitness"]
SUMMARY_COLUMNS = ["algorithm", "function", "dim", "mean", "std", "min", "median", "max"]

# short parameter names accepted in overrides and sweeps
SWEEP_PARAMETERS = ("H", "k", "M", "L", "C")
_CONFIG_FIELDS = {"population_size", "p_c", "p_g", "p_c1", "p_c2", "memory_length", "delta",
                  "classic_scale", "one_fifth_r", "one_fifth_epoch", "one_fifth_sigma0"}


class ValidationError(ConfigurationError):
    """A manifest or input file failed validation."""


@dataclass
class AlgorithmSpec:
    name: str
    variant: str
    overrides: dict = field(default_factory=dict)


@dataclass
class ExperimentManifest:
    algorithms: list
    functions: list
    dimensions: list
    seeds: list
    budget_multiplier: int = 2000
    output_dir: str = "results"
    catalog_seed: int = CATALOG_SEED
    record_wall_time: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise ValidationError("algorithms: at least one algorithm is required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValidationError(f"algorithms: duplicate names in {names}")
        for a in self.algorithms:
            if a.variant not in VARIANTS:
                raise ValidationError(f"algorithms[{a.name}].variant: unknown {a.variant!r}")
            _check_overrides(a)
        if not self.functions:
            raise ValidationError("functions: at least one function is required")
        for fid in self.functions:
            base = fid[:-3] if fid.endswith("_sr") else fid
            if base not in BASE_FUNCTIONS:
                raise ValidationError(f"functions: unknown function {fid!r}")
        if not self.dimensions or any(int(d) != d or d < 1 for d in self.dimensions):
            raise ValidationError("dimensions: need positive integers")
        if not self.seeds:
            raise ValidationError("seeds: at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("seeds: seeds must be distinct")
        if int(self.budget_multiplier) != self.budget_multiplier or self.budget_multiplier < 1:
            raise ValidationError("budget_multiplier: must be an integer >= 1")

    def budget(self, dim: int) -> int:
        return int(self.budget_multiplier) * int(dim)

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2)


def _check_overrides(a: AlgorithmSpec):
    for key, value in a.overrides.items():
        if key not in SWEEP_PARAMETERS and key not in _CONFIG_FIELDS:
            raise ValidationError(f"algorithms[{a.name}].overrides.{key}: unknown parameter")
    try:
        build_config(a, 10**9)
    except ConfigurationError as exc:
        raise ValidationError(f"algorithms[{a.name}].overrides: {exc}") from exc


def default_manifest(n_seeds: int = 30, seed_base: int = 0) -> ExperimentManifest:
    """Desk-scale comparison of classic BSO and ASBSO on the full catalog."""
    functions = [f for name in BASE_FUNCTIONS for f in (name, f"{name}_sr")]
    return ExperimentManifest(
        algorithms=[AlgorithmSpec("BSO", "classic_bso"), AlgorithmSpec("ASBSO", "asbso_ims")],
        functions=functions,
        dimensions=[10, 30],
        seeds=list(range(seed_base, seed_base + n_seeds)),
        budget_multiplier=2000,
    )


def load_manifest(source, seed_base: Optional[int] = None) -> ExperimentManifest:
    """Parse a manifest from a path, JSON string, or dict.

    ``seeds`` may be omitted, in which case ``n_seeds`` (default 30)
    consecutive seeds starting at ``seed_base`` (default 0) are used. A
    `seed_base` argument overrides the file's value.
    """
    if isinstance(source, dict):
        data = dict(source)
    else:
        text = str(source)
        path = Path(text)
        try:
            if not text.lstrip().startswith("{"):
                text = path.read_text()
        except OSError:
            raise
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("manifest must be a JSON object")
    try:
        algos = [AlgorithmSpec(a["name"], a.get("variant", "asbso_ims"), dict(a.get("overrides", {})))
                 for a in data["algorithms"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"algorithms: each entry needs a name ({exc})") from exc
    functions = data.get("functions")
    if functions == "catalog":
        functions = [f for name in BASE_FUNCTIONS for f in (name, f"{name}_sr")]
    base = data.get("seed_base", 0) if seed_base is None else seed_base
    seeds = data.get("seeds")
    if seeds is None:
        seeds = list(range(base, base + int(data.get("n_seeds", 30))))
    elif seed_base is not None:
        seeds = [s + seed_base for s in seeds]
    known = {"algorithms", "functions", "dimensions", "seeds", "n_seeds", "seed_base",
             "budget_multiplier", "output_dir", "catalog_seed", "record_wall_time"}
    extra = set(data) - known
    if extra:
        raise ValidationError(f"unknown manifest field(s): {sorted(extra)}")
    if "dimensions" not in data:
        raise ValidationError("dimensions: field is required")
    return ExperimentManifest(
        algorithms=algos,
        functions=list(functions or []),
        dimensions=list(data["dimensions"]),
        seeds=list(seeds),
        budget_multiplier=data.get("budget_multiplier", 2000),
        output_dir=data.get("output_dir", "results"),
        catalog_seed=data.get("catalog_seed", CATALOG_SEED),
        record_wall_time=bool(data.get("record_wall_time", False)),
    )


def build_config(algo: AlgorithmSpec, budget: int) -> BsoConfig:
    ov = dict(algo.overrides)
    ladder_args = {"k": ov.pop("k", 10.0), "H": ov.pop("H", 20.0), "M": ov.pop("M", 4)}
    kwargs = {"budget": budget, "variant": algo.variant, "ladder": make_ladder(**ladder_args)}
    if "L" in ov:
        kwargs["memory_length"] = int(ov.pop("L"))
    if "C" in ov:
        c = ov.pop("C")
        if int(c) != c:
            raise ConfigurationError("C must be an integer")
        kwargs["clustering"] = ClusteringConfig(n_clusters=int(c))
    kwargs.update(ov)
    return BsoConfig(**kwargs)


def _job(args):
    algo, function_id, dim, seed, budget, catalog_seed = args
    spec, f = get_benchmark(function_id, dim, catalog_seed)
    cfg = build_config(algo, budget)
    run_id = f"{algo.name}|{function_id}|{dim}|{seed}"
    record, trace = run(f, cfg, seed, algorithm=algo.name, run_id=run_id)
    record.function = function_id
    return record, trace.samples


def _fmt(x) -> str:
    if isinstance(x, float):
        return "" if np.isnan(x) else repr(x)
    return str(x)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _summary_rows(records):
    groups = {}
    for r in records:
        groups.setdefault((r.algorithm, r.function, r.dim), []).append(r.best_fitness)
    rows = []
    for (alg, fn, dim), vals in sorted(groups.items()):
        v = np.array(vals)
        std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        rows.append([alg, fn, dim, float(np.mean(v)), std, float(v.min()),
                     float(np.median(v)), float(v.max())])
    return rows


def run_manifest(manifest, out_dir=None, workers: int = 1) -> Path:
    """Execute every (algorithm, function, dimension, seed) cell and write the CSVs.

    Returns the output directory.
    """
    if not isinstance(manifest, ExperimentManifest):
        manifest = load_manifest(manifest)
    out = Path(out_dir if out_dir is not None else manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")

    jobs = [(a, fn, d, s, manifest.budget(d), manifest.catalog_seed)
            for a in manifest.algorithms for fn in manifest.functions
            for d in manifest.dimensions for s in manifest.seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_job(j) for j in jobs]

    results.sort(key=lambda rs: (rs[0].algorithm, rs[0].function, rs[0].dim, rs[0].seed))
    records = [r for r, _ in results]
    if not manifest.record_wall_time:
        for r in records:
            r.wall_ms = float("nan")
    _write_csv(out / "trials.csv", TRIAL_COLUMNS,
               ([getattr(r, c) for c in TRIAL_COLUMNS] for r in records))
    _write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS,
               ([r.run_id, e, b] for r, samples in results for e, b in samples))
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(records))
    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return out


def _float(s: str) -> float:
    return float("nan") if s == "" else float(s)


def read_trials(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRIAL_COLUMNS:
            raise ValidationError(f"{path}: expected columns {TRIAL_COLUMNS}, got {reader.fieldnames}")
        return [TrialRecord(row["run_id"], row["algorithm"], row["function"], int(row["dim"]),
                            int(row["seed"]), _float(row["best_fitness"]), int(row["evals_used"]),
                            _float(row["wall_ms"]))
                for row in reader]


def read_convergence(path) -> dict:
    """Map run_id to a list of (evals, best_fitness) samples."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CONVERGENCE_COLUMNS:
            raise ValidationError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            out.setdefault(row["run_id"], []).append((int(row["evals"]), _float(row["best_fitness"])))
    return out


def read_summary(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SUMMARY_COLUMNS:
            raise ValidationError(f"{path}: unexpected columns {reader.fieldnames}")
        return [{"algorithm": r["algorithm"], "function": r["function"], "dim": int(r["dim"]),
                 **{k: _float(r[k]) for k in SUMMARY_COLUMNS[3:]}} for r in reader]


def _cell_means(records, per_seed=False):
    cells = {}
    for r in records:
        key = (r.function, r.dim, r.seed) if per_seed else (r.function, r.dim)
        cells.setdefault(r.algorithm, {}).setdefault(key, []).append(r.best_fitness)
    return {a: {k: float(np.mean(v)) for k, v in d.items()} for a, d in cells.items()}


def _check_cells(means, algorithms):
    all_cells = set().union(*(set(means[a]) for a in algorithms))
    missing = {a: sorted(all_cells - set(means[a])) for a in algorithms}
    missing = {a: m for a, m in missing.items() if m}
    if missing:
        detail = "; ".join(f"{a} lacks {', '.join(f'{c[0]}@D{c[1]}' for c in m)}"
                           for a, m in missing.items())
        raise ValidationError(f"algorithms do not share a common function set: {detail}")
    return sorted(all_cells, key=lambda c: (c[1], c[0], *c[2:]))


def _yes(flag: bool) -> str:
    return "YES" if flag else "NO"


def compare(trials, control: str, test: str = "wilcoxon", out_dir=None,
            algorithm_order=None) -> dict:
    """Compare `control` against every other algorithm in a trials file.

    Each (function, dim) cell is reduced to its mean best fitness. A Friedman
    comparison over a single cell ranks per seed instead. The Wilcoxon report has one row per (dimension, opponent); the Friedman
    report ranks all algorithms over all cells. Writes
    ``comparison_<test>.txt`` and ``comparison_<test>.json`` to `out_dir`
    (defaults to the trials file's directory when `trials` is a path) and
    returns the JSON payload.
    """
    if test not in ("wilcoxon", "friedman"):
        raise ValidationError(f"test: unknown test {test!r}")
    if isinstance(trials, (str, os.PathLike)):
        path = Path(trials)
        records = read_trials(path)
        if out_dir is None:
            out_dir = path.parent
    else:
        records = list(trials)
    means = _cell_means(records)
    algorithms = list(algorithm_order) if algorithm_order else sorted(means)
    if control not in means:
        raise ValidationError(f"control: {control!r} not found among {sorted(means)}")
    cells = _check_cells(means, algorithms)
    others = [a for a in algorithms if a != control]

    if test == "wilcoxon":
        if not others:
            raise ValidationError("wilcoxon needs at least two algorithms")
        rows = []
        for dim in sorted({d for _, d in cells}):
            dcells = [c for c in cells if c[1] == dim]
            for opp in others:
                a = [means[control][c] for c in dcells]
                b = [means[opp][c] for c in dcells]
                res = wilcoxon_signed_rank(a, b)
                rows.append({"dim": dim, "versus": opp, "R_plus": res.R_plus,
                             "R_minus": res.R_minus, "p_value": res.p_value,
                             "n": res.n_effective, "method": res.method,
                             "alpha_0.05": _yes(res.p_value < 0.05),
                             "alpha_0.01": _yes(res.p_value < 0.01)})
        payload = {"test": "wilcoxon", "control": control, "rows": rows}
        lines = [f"Wilcoxon signed-rank, control = {control}",
                 f"{'D':>5} {'vs.':<16} {'R+':>9} {'R-':>9} {'p-value':>11} {'a=0.05':>7} {'a=0.01':>7}"]
        for r in rows:
            lines.append(f"{r['dim']:>5} {r['versus']:<16} {r['R_plus']:>9.1f} {r['R_minus']:>9.1f} "
                         f"{r['p_value']:>11.3E} {r['alpha_0.05']:>7} {r['alpha_0.01']:>7}")
    else:
        if len(cells) < 2:
            means = _cell_means(records, per_seed=True)
            cells = _check_cells(means, algorithms)
        payload, lines = _friedman_report(means, algorithms, control, cells)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"comparison_{test}.txt").write_text("\n".join(lines) + "\n")
        (out / f"comparison_{test}.json").write_text(json.dumps(payload, indent=2) + "\n")
    payload["text"] = "\n".join(lines)
    return payload


def _friedman_report(means, algorithms, control, cells):
    if len(algorithms) < 2:
        rank = {algorithms[0]: 1.0}
        payload = {"test": "friedman", "control": control, "n_problems": len(cells),
                   "ranking": rank, "rows": []}
        return payload, [f"Friedman ranking over {len(cells)} problems",
                         f"{control}: ranking 1.0000 (single algorithm, no comparisons)"]
    matrix = np.array([[means[a][c] for a in algorithms] for c in cells])
    ci = algorithms.index(control)
    res = friedman_with_posthoc(matrix, ci)
    rows = []
    for k, j in enumerate(res.comparisons):
        rows.append({"algorithm": algorithms[j], "ranking": float(res.average_ranks[j]),
                     "p_unadjusted": float(res.p_unadjusted[k]),
                     "p_bonferroni": float(res.p_bonferroni[k]),
                     "p_holm": float(res.p_holm[k]),
                     "p_hochberg": float(res.p_hochberg[k])})
    rows.sort(key=lambda r: r["p_unadjusted"])
    payload = {"test": "friedman", "control": control, "n_problems": len(cells),
               "ranking": {a: float(r) for a, r in zip(algorithms, res.average_ranks)},
               "friedman_statistic": res.statistic, "friedman_p": res.p_friedman, "rows": rows}
    lines = [f"Friedman ranking over {len(cells)} problems (lower is better)",
             f"{'Algorithm':<16} {'Ranking':>8} {'unadj p':>10} {'p_Bonf':>10} {'p_Holm':>10} {'p_Hochberg':>10}",
             f"{control + ' vs.':<16} {res.average_ranks[ci]:>8.4f}"]
    for r in rows:
        lines.append(f"{r['algorithm']:<16} {r['ranking']:>8.4f} {r['p_unadjusted']:>10.6f} "
                     f"{r['p_bonferroni']:>10.6f} {r['p_holm']:>10.6f} {r['p_hochberg']:>10.6f}")
    return payload, lines


def _parse_value(param: str, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"values: {value!r} is not a number") from None
    if param in ("M", "L", "C"):
        if v != int(v) or v < 1:
            raise ValidationError(f"values: {param} must be a positive integer, got {value!r}")
        return int(v)
    if not v > 0:
        raise ValidationError(f"values: {param} must be positive, got {value!r}")
    return v


def sweep(parameter: str, values, base_manifest, out_dir=None, workers: int = 1) -> dict:
    """Run the base manifest's first algorithm once per parameter value and rank the values.

    The best-ranked value becomes the Friedman control, and the report is
    written next to the grid outputs.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValidationError(f"param: unknown parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    values = [_parse_value(parameter, v) for v in values]
    if not values:
        raise ValidationError("values: need at least one value")
    if len(set(values)) != len(values):
        raise ValidationError("values: duplicates")
    m = base_manifest if isinstance(base_manifest, ExperimentManifest) else load_manifest(base_manifest)
    base = m.algorithms[0]
    if parameter != "C" and base.variant not in ("asbso_ims", "asbso_sfms"):
        raise ValidationError(f"param: {base.variant} ignores {parameter}; sweep an adaptive variant")
    algos = []
    for v in values:
        ov = dict(base.overrides)
        ov[parameter] = v
        algos.append(AlgorithmSpec(f"{parameter}={v:g}", base.variant, ov))
    sm = ExperimentManifest(algos, m.functions, m.dimensions, m.seeds, m.budget_multiplier,
                            m.output_dir, m.catalog_seed, m.record_wall_time)
    for a in algos:
        try:
            build_config(a, 10**9)
        except ConfigurationError as exc:
            raise ValidationError(f"values: {exc}") from exc
    out = run_manifest(sm, out_dir, workers)
    records = read_trials(out / "trials.csv")
    names = [a.name for a in algos]
    if len(names) == 1:
        control = names[0]
    else:
        means = _cell_means(records)
        if len(means[names[0]]) < 2:
            means = _cell_means(records, per_seed=True)
        cells = _check_cells(means, names)
        matrix = np.array([[means[a][c] for a in names] for c in cells])
        control = names[int(np.argmin(friedman_with_posthoc(matrix, 0).average_ranks))]
    report = compare(records, control, "friedman", out_dir=out, algorithm_order=names)
    report["parameter"] = parameter
    report["values"] = values
    return report
