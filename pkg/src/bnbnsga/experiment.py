"""Multi-run experiment batteries comparing the four solver configurations.

A battery runs one method ``runs`` times with seeds ``base_seed + i`` and
records, per run, whether any feasible point was found, the final front and a
reservoir sample of every evaluated point. Everything written to disk except
``timing.json`` is a deterministic function of the ExperimentSpec.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .model import ContractError, ProblemDef
from .nsga2 import GAParams, evolve, seed_population
from .oracle import hypervolume_2d, reference_point, toy_instances
from .reducer3s import ReducerConfig, assemble, load_config, preset
from .reducer3s.config import data_path
from .seeder import SeederPolicy, seeded_solve

METHODS = ("nsga2-random", "nsga2-seeded", "bnb-nsga2", "bnb-nsga2-legacy")
# share of the run budget the harvest tree may use, so the final GA keeps time
TREE_SHARE = 0.5
# solvers stop this fraction early so bookkeeping fits inside the hard cap
DEADLINE_RESERVE = 0.01


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass(frozen=True)
class BnBBudget:
    node_generations: int = 50
    leaf_generations: int | None = None
    max_nodes: int = 10_000
    time_limit_s: float | None = 1800.0


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str = "reference"
    method: str = "nsga2-random"
    runs: int = 10
    base_seed: int = 0
    ga: GAParams = field(default_factory=GAParams)
    bnb: BnBBudget = field(default_factory=BnBBudget)
    reducer: dict = field(default_factory=dict)
    seed_file: str | None = None
    run_time_limit_s: float = 1800.0
    explored_cap: int = 50_000
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be unsigned")
        if self.explored_cap < 0 or self.workers < 1:
            raise ConfigError("explored_cap must be >= 0 and workers >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        data = dict(data)
        try:
            if "ga" in data:
                data["ga"] = GAParams(**data["ga"])
            if "bnb" in data:
                data["bnb"] = BnBBudget(**data["bnb"])
            return cls(**data)
        except (TypeError, ContractError) as exc:
            raise ConfigError(str(exc)) from exc


def load_spec(path: str | Path) -> ExperimentSpec:
    try:
        with open(path) as fh:
            return ExperimentSpec.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def reducer_config(spec: ExperimentSpec) -> ReducerConfig:
    if spec.problem in ("reference", "realistic"):
        cfg = preset(spec.problem)
    else:
        cfg = load_config(spec.problem)
    if spec.reducer:
        cfg = ReducerConfig.from_dict({**cfg.to_dict(), **spec.reducer})
    return cfg


def build_problem(spec: ExperimentSpec) -> ProblemDef:
    """Resolve ``spec.problem``: a preset name, ``toy:<name>`` or a config path."""
    if spec.problem.startswith("toy:"):
        name = spec.problem[4:]
        for toy in toy_instances():
            if toy.name == name:
                return toy.problem
        raise ConfigError(f"unknown toy problem {name!r}")
    try:
        return assemble(reducer_config(spec))
    except (OSError, json.JSONDecodeError, ContractError, TypeError) as exc:
        raise ConfigError(f"bad problem {spec.problem!r}: {exc}") from exc


def load_seed_vectors(spec: ExperimentSpec) -> list[np.ndarray]:
    if spec.seed_file is not None:
        path = Path(spec.seed_file)
    elif spec.problem == "reference" and not spec.reducer:
        path = data_path("reference_feasible.json")
    else:
        raise ConfigError("nsga2-seeded needs seed_file for this problem")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read seed file {path}: {exc}") from exc
    return [np.asarray(v, dtype=float) for v in data["vectors"]]


class Reservoir:
    """Seeded uniform reservoir sample (algorithm R) of evaluated points."""

    def __init__(self, cap: int, seed: int):
        self.cap = cap
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
        self.items = np.empty((cap, 3))
        self.seen = 0

    def __call__(self, X, F, V) -> None:
        rows = np.c_[F[:, :2], (V == 0.0).astype(float)]
        n = len(rows)
        fill = min(max(self.cap - self.seen, 0), n)
        if fill:
            self.items[self.seen:self.seen + fill] = rows[:fill]
        rest = rows[fill:]
        if len(rest):
            t = self.seen + fill + np.arange(len(rest))
            j = self.rng.integers(0, t + 1)
            for k in np.flatnonzero(j < self.cap):
                self.items[j[k]] = rest[k]
        self.seen += n

    def sample(self) -> np.ndarray:
        return self.items[: min(self.seen, self.cap)].copy()


@dataclass
class RunRecord:
    run_index: int
    rng_seed: int
    converged: bool
    wall_time_s: float
    front: list
    explored: list
    evaluations: int = 0
    seed_count: int | None = None
    tree: dict | None = None
    hypervolume: float | None = None
    truncated: bool = False
    error: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("wall_time_s")
        return d


def _sorted_rows(rows: np.ndarray) -> list:
    if len(rows) == 0:
        return []
    rows = np.unique(rows, axis=0)
    return [[float(a), float(b), bool(c)] for a, b, c in rows]


def run_one(spec: ExperimentSpec, index: int) -> RunRecord:
    """Execute one run of ``spec.method``; failures become error records."""
    seed = spec.base_seed + index
    t0 = time.monotonic()
    deadline = t0 + spec.run_time_limit_s * (1.0 - DEADLINE_RESERVE)
    reservoir = Reservoir(spec.explored_cap, seed)
    try:
        problem = build_problem(spec)
        params = replace(spec.ga, rng_seed=seed)
        seed_count = tree = None
        truncated = False
        if spec.method in ("nsga2-random", "nsga2-seeded"):
            seeds = load_seed_vectors(spec) if spec.method == "nsga2-seeded" else []
            seed_count = len(seeds) if seeds else None
            rng = np.random.default_rng(seed)
            initial = seed_population(problem, params.pop_size, seeds, rng, reservoir)
            final_pop, front = evolve(problem, params, initial, rng=rng, observer=reservoir, deadline=deadline)
            truncated = bool(final_pop.meta.get("truncated"))
        else:
            tree_limit = TREE_SHARE * spec.run_time_limit_s
            if spec.bnb.time_limit_s is not None:
                tree_limit = min(tree_limit, spec.bnb.time_limit_s)
            policy = SeederPolicy(
                legacy=spec.method == "bnb-nsga2-legacy",
                node_generations=spec.bnb.node_generations,
                leaf_generations=spec.bnb.leaf_generations,
                max_nodes=spec.bnb.max_nodes,
                time_limit_s=tree_limit,
            )
            front, report = seeded_solve(problem, params, policy, observer=reservoir, deadline=deadline)
            seed_count = report.seed_count
            tree = {"nodes": report.harvest_nodes, "status": report.tree_status, "exhausted": report.exhausted}
            truncated = report.truncated
        F = np.array([ind.f[:2] for ind in front]).reshape(-1, 2)
        rows = np.c_[F, np.ones(len(F))]
        return RunRecord(
            run_index=index,
            rng_seed=seed,
            converged=len(front) > 0,
            wall_time_s=time.monotonic() - t0,
            front=_sorted_rows(rows),
            explored=[[float(a), float(b), bool(c)] for a, b, c in reservoir.sample()],
            evaluations=reservoir.seen,
            seed_count=seed_count,
            tree=tree,
            truncated=truncated,
        )
    except ConfigError:
        raise
    except Exception as exc:
        return RunRecord(
            index, seed, False, time.monotonic() - t0, [], [],
            error="".join(traceback.format_exception_only(type(exc), exc)).strip(),
        )


@dataclass
class BatteryReport:
    method: str
    problem: str
    runs: int
    base_seed: int
    converged_count: int
    failed_runs: int
    median_wall_time_s: float
    reference_point: list | None
    records: list[RunRecord]

    def summary(self) -> dict:
        return {
            "method": self.method,
            "problem": self.problem,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "converged_count": self.converged_count,
            "failed_runs": self.failed_runs,
            "reference_point": self.reference_point,
            "hypervolumes": [r.hypervolume for r in self.records],
            "converged": [r.converged for r in self.records],
        }


def run_battery(spec: ExperimentSpec) -> BatteryReport:
    if spec.method == "nsga2-seeded":
        load_seed_vectors(spec)  # fail fast on config errors
    build_problem(spec)
    if spec.workers > 1 and spec.runs > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(run_one, [spec] * spec.runs, range(spec.runs)))
    else:
        records = [run_one(spec, i) for i in range(spec.runs)]
    fronts = [np.array([row[:2] for row in r.front]) for r in records if r.front]
    ref = reference_point(*fronts) if fronts else None
    for r in records:
        r.hypervolume = hypervolume_2d(np.array([row[:2] for row in r.front]), ref) if ref is not None else 0.0
    return BatteryReport(
        method=spec.method,
        problem=spec.problem,
        runs=spec.runs,
        base_seed=spec.base_seed,
        converged_count=sum(r.converged for r in records),
        failed_runs=sum(r.error is not None for r in records),
        median_wall_time_s=statistics.median(r.wall_time_s for r in records),
        reference_point=None if ref is None else [float(v) for v in ref],
        records=records,
    )


def _dump(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _csv(rows_by_run: list[tuple[int, list]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "f1", "f2", "feasible"])
    for run, rows in rows_by_run:
        for f1, f2, feas in rows:
            w.writerow([run, repr(float(f1)), repr(float(f2)), int(bool(feas))])
    return buf.getvalue()


def write_battery(report: BatteryReport, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump(report.summary(), out / "battery.json")
    for r in report.records:
        _dump(r.to_json(), out / f"run_{r.run_index}.json")
    (out / "fronts.csv").write_text(_csv([(r.run_index, r.front) for r in report.records]))
    (out / "explored.csv").write_text(_csv([(r.run_index, r.explored) for r in report.records]))
    _dump(
        {
            "median_wall_time_s": report.median_wall_time_s,
            "wall_time_s": [r.wall_time_s for r in report.records],
        },
        out / "timing.json",
    )
    return out


def read_battery(out_dir: str | Path) -> BatteryReport:
    out = Path(out_dir)
    summary = json.loads((out / "battery.json").read_text())
    timing_path = out / "timing.json"
    walls = json.loads(timing_path.read_text())["wall_time_s"] if timing_path.exists() else [0.0] * summary["runs"]
    records = []
    for i in range(summary["runs"]):
        d = json.loads((out / f"run_{i}.json").read_text())
        records.append(RunRecord(wall_time_s=walls[i], **d))
    return BatteryReport(
        method=summary["method"],
        problem=summary["problem"],
        runs=summary["runs"],
        base_seed=summary["base_seed"],
        converged_count=summary["converged_count"],
        failed_runs=summary["failed_runs"],
        median_wall_time_s=statistics.median(walls),
        reference_point=summary["reference_point"],
        records=records,
    )


def compare(spec: ExperimentSpec, methods=METHODS) -> dict[str, BatteryReport]:
    """One battery per method with identical budgets and paired seeds."""
    reports = {}
    for method in methods:
        sub = replace(spec, method=method, output_dir=str(Path(spec.output_dir) / method))
        reports[method] = run_battery(sub)
        write_battery(reports[method], sub.output_dir)
    _dump(
        {m: {"converged_count": r.converged_count, "runs": r.runs} for m, r in reports.items()},
        Path(spec.output_dir) / "comparison.json",
    )
    return reports
