"""Command-line entry point: ``bnbnsga {run,compare,schema,plot}``.

Exit codes: 0 on success, 1 for configuration errors, 2 when any run failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from .experiment import (
    METHODS,
    BnBBudget,
    ConfigError,
    ExperimentSpec,
    compare,
    load_spec,
    read_battery,
    run_battery,
    write_battery,
)
from .nsga2 import GAParams
from .plots import render_outputs
from .reducer3s import constraint_index_map, domain_size, preset
from .reducer3s.config import FACTOR_NAMES, ReducerConfig

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2

# flag -> (section, field); section None means a top-level ExperimentSpec field
_FLAGS = {
    "problem": (None, "problem"),
    "runs": (None, "runs"),
    "base_seed": (None, "base_seed"),
    "seed_file": (None, "seed_file"),
    "run_time_limit": (None, "run_time_limit_s"),
    "explored_cap": (None, "explored_cap"),
    "output_dir": (None, "output_dir"),
    "workers": (None, "workers"),
    "pop_size": ("ga", "pop_size"),
    "generations": ("ga", "max_generations"),
    "p_crossover": ("ga", "p_crossover"),
    "p_mutation": ("ga", "p_mutation"),
    "eta_c": ("ga", "eta_c"),
    "eta_m": ("ga", "eta_m"),
    "node_generations": ("bnb", "node_generations"),
    "leaf_generations": ("bnb", "leaf_generations"),
    "max_nodes": ("bnb", "max_nodes"),
    "tree_time_limit": ("bnb", "time_limit_s"),
}


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment JSON file; flags override its values")
    p.add_argument("--problem", help="preset name (reference, realistic), toy:<name> or reducer config path")
    p.add_argument("--runs", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--seed-file", help="JSON file with a 'vectors' list for nsga2-seeded")
    p.add_argument("--run-time-limit", type=float, help="wall-clock cap per run in seconds")
    p.add_argument("--explored-cap", type=int, help="reservoir size of the explored sample")
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    p.add_argument("--pop-size", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--p-crossover", type=float)
    p.add_argument("--p-mutation", type=float)
    p.add_argument("--eta-c", type=float)
    p.add_argument("--eta-m", type=float)
    p.add_argument("--node-generations", type=int)
    p.add_argument("--leaf-generations", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--tree-time-limit", type=float)
    p.add_argument("--no-plots", action="store_true", help="skip SVG rendering")


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    spec = load_spec(args.config) if args.config else ExperimentSpec()
    top, ga, bnb = {}, {}, {}
    for flag, (section, name) in _FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            {None: top, "ga": ga, "bnb": bnb}[section][name] = value
    if getattr(args, "method", None):
        top["method"] = args.method
    try:
        return replace(spec, ga=replace(spec.ga, **ga), bnb=replace(spec.bnb, **bnb), **top)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _status(reports) -> int:
    failed = sum(r.failed_runs for r in reports)
    for r in reports:
        print(f"{r.method}: converged {r.converged_count}/{r.runs}, failed {r.failed_runs}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_run(args) -> int:
    spec = spec_from_args(args)
    report = run_battery(spec)
    write_battery(report, spec.output_dir)
    if not args.no_plots:
        render_outputs(report, spec.output_dir)
    return _status([report])


def cmd_compare(args) -> int:
    spec = spec_from_args(args)
    reports = compare(spec, tuple(args.methods))
    if not args.no_plots:
        render_outputs(reports, spec.output_dir)
    return _status(reports.values())


def schema_document(problem: str = "reference") -> dict:
    cfg = preset(problem) if problem in ("reference", "realistic") else None
    return {
        "constraints": constraint_index_map(),
        "domain_size": domain_size(cfg) if cfg else None,
        "experiment_spec": {
            "top": {f.name: str(f.type) for f in fields(ExperimentSpec) if f.name not in ("ga", "bnb")},
            "ga": {f.name: str(f.type) for f in fields(GAParams)},
            "bnb": {f.name: str(f.type) for f in fields(BnBBudget)},
            "methods": list(METHODS),
        },
        "reducer_config": {
            "fields": {f.name: str(f.type) for f in fields(ReducerConfig)},
            "factors": list(FACTOR_NAMES),
        },
        "outputs": {
            "battery.json": ["method", "problem", "runs", "base_seed", "converged_count", "failed_runs",
                             "reference_point", "hypervolumes", "converged"],
            "run_<i>.json": ["run_index", "rng_seed", "converged", "front", "explored", "evaluations",
                             "seed_count", "tree", "hypervolume", "truncated", "error"],
            "timing.json": ["median_wall_time_s", "wall_time_s"],
            "fronts.csv": ["run", "f1", "f2", "feasible"],
            "explored.csv": ["run", "f1", "f2", "feasible"],
        },
    }


def cmd_schema(args) -> int:
    text = json.dumps(schema_document(args.problem), indent=1, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        reports = {r.method: r for r in (read_battery(d) for d in args.dirs)}
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read battery: {exc}") from exc
    paths = render_outputs(reports, args.output_dir or args.dirs[0])
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnbnsga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one battery of a single method")
    run.add_argument("--method", choices=METHODS)
    _add_spec_flags(run)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run one battery per method with paired seeds")
    cmp_.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    _add_spec_flags(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    schema = sub.add_parser("schema", help="print the constraint index map and file schemas")
    schema.add_argument("--problem", default="reference")
    schema.add_argument("--output")
    schema.set_defaults(func=cmd_schema)

    plot = sub.add_parser("plot", help="re-render SVGs from saved battery directories")
    plot.add_argument("dirs", nargs="+")
    plot.add_argument("--output-dir")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for failed runs
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
