"""Command-line entry point.

Commands:

* ``kinbench run <config.yaml> [--seed N] [--out DIR] [--workers K]`` —
  execute the experiment for each configured seed, writing one
  ``eval_seed<N>.csv`` matrix per seed, an ``aggregate.csv``, and a
  ``manifest.yaml`` (config hash, seeds, wall-clock).  Seeds whose matrix
  file already exists are skipped, so interrupted multi-seed runs resume.
* ``kinbench report <results-dir>`` — regenerate lower-triangular
  reward/accuracy tables, per-experiment accuracy curves, and retention
  columns from the matrices found in the directory (or its immediate
  subdirectories).
* ``kinbench list <benchmark>`` — print the task or track inventory.

Exit codes: 0 ok, 1 bad input, 2 runtime failure.  The environment
variable ``KINBENCH_RESULTS`` sets the default output root for ``run``.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
import time
from pathlib import Path

import yaml

from . import __version__
from .arm import hlr_default_tasks, llr_default_tasks
from .config import RunConfig, config_hash, load_config
from .harness import (
    AggregateCell,
    EvalMatrix,
    aggregate_runs,
    aggregate_to_csv,
    run_sequence,
)
from .wheeled import enumerate_tracks

RESULTS_ENV_VAR = "KINBENCH_RESULTS"

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_RUNTIME = 2


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _default_out_dir(config_path: Path, config: RunConfig) -> Path:
    if config.out_dir:
        return Path(config.out_dir)
    root = os.environ.get(RESULTS_ENV_VAR, "results")
    return Path(root) / config_path.stem


def _seed_file(out_dir: Path, seed: int) -> Path:
    return out_dir / f"eval_seed{seed}.csv"


def _run_one_seed(config: RunConfig, seed: int) -> EvalMatrix:
    return run_sequence(config, run_seed=seed)


def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        return _fail(f"config file not found: {config_path}", EXIT_BAD_INPUT)
    try:
        config = load_config(config_path)
    except (ValueError, yaml.YAMLError) as exc:
        return _fail(str(exc), EXIT_BAD_INPUT)

    seeds = [args.seed] if args.seed is not None else list(config.seeds)
    out_dir = Path(args.out) if args.out else _default_out_dir(config_path, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    hash_value = config_hash(config)

    # Resume: keep seeds whose matrices already exist, provided they come
    # from the identical experiment.
    pending = []
    for seed in seeds:
        path = _seed_file(out_dir, seed)
        if path.exists():
            try:
                existing = EvalMatrix.from_csv(path)
            except ValueError as exc:
                return _fail(f"unreadable existing result {path}: {exc}",
                             EXIT_BAD_INPUT)
            if existing.config_hash != hash_value:
                return _fail(
                    f"{path} was produced by a different configuration "
                    f"(hash {existing.config_hash[:12]}… != {hash_value[:12]}…); "
                    "use a fresh output directory",
                    EXIT_BAD_INPUT,
                )
            print(f"seed {seed}: found existing {path.name}, skipping")
        else:
            pending.append(seed)

    started = time.time()
    try:
        if args.workers > 1 and len(pending) > 1:
            with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
                futures = {
                    pool.submit(_run_one_seed, config, seed): seed
                    for seed in pending
                }
                for future in concurrent.futures.as_completed(futures):
                    seed = futures[future]
                    matrix = future.result()
                    matrix.to_csv(_seed_file(out_dir, seed))
                    print(f"seed {seed}: wrote {_seed_file(out_dir, seed).name}")
        else:
            for seed in pending:
                matrix = _run_one_seed(config, seed)
                matrix.to_csv(_seed_file(out_dir, seed))
                print(f"seed {seed}: wrote {_seed_file(out_dir, seed).name}")
    except Exception as exc:  # runtime failure: report and signal exit 2
        return _fail(f"run failed: {exc}", EXIT_RUNTIME)
    wall_clock = time.time() - started

    matrices = [EvalMatrix.from_csv(_seed_file(out_dir, s)) for s in seeds]
    cells = aggregate_runs(matrices)
    aggregate_to_csv(cells, hash_value, out_dir / "aggregate.csv")
    manifest = {
        "config_file": str(config_path),
        "config_hash": hash_value,
        "benchmark": config.benchmark,
        "seeds": [int(s) for s in seeds],
        "wall_clock_seconds": round(wall_clock, 3),
        "package_version": __version__,
    }
    (out_dir / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=False))
    print(f"wrote {out_dir / 'aggregate.csv'} and manifest.yaml")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _metric_table(cells: list[AggregateCell], metric: str) -> str:
    """Lower-triangular text table: rows = evaluated task, columns =
    evaluated-after (trained_upto)."""
    n = 1 + max(c.trained_upto for c in cells)
    by_key = {(c.trained_upto, c.evaluated): getattr(c, metric) for c in cells}
    lines = ["evaluated," + ",".join(f"after_T{j + 1}" for j in range(n))]
    for i in range(n):
        row = [f"T{i + 1}"]
        for j in range(n):
            value = by_key.get((j, i))
            row.append("-" if value is None else repr(value))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _accuracy_curve(cells: list[AggregateCell]) -> str:
    """Mean accuracy over all tasks seen so far, after each task."""
    n = 1 + max(c.trained_upto for c in cells)
    lines = ["trained_upto,mean_accuracy,mean_avg_step_reward"]
    for j in range(n):
        row_cells = [c for c in cells if c.trained_upto == j]
        acc = sum(c.accuracy_mean for c in row_cells) / len(row_cells)
        rew = sum(c.avg_step_reward_mean for c in row_cells) / len(row_cells)
        lines.append(f"{j},{acc!r},{rew!r}")
    return "\n".join(lines) + "\n"


def _retention_column(cells: list[AggregateCell]) -> str:
    """First task's metrics after each later task (the forgetting curve)."""
    rows = sorted((c for c in cells if c.evaluated == 0),
                  key=lambda c: c.trained_upto)
    lines = ["trained_upto,avg_step_reward_mean,avg_episode_reward_mean,"
             "accuracy_mean"]
    for c in rows:
        lines.append(
            f"{c.trained_upto},{c.avg_step_reward_mean!r},"
            f"{c.avg_episode_reward_mean!r},{c.accuracy_mean!r}"
        )
    return "\n".join(lines) + "\n"


def _find_experiments(results_dir: Path) -> dict[str, list[Path]]:
    """Map experiment name -> matrix files, scanning the directory and its
    immediate subdirectories."""
    experiments: dict[str, list[Path]] = {}
    direct = sorted(results_dir.glob("eval_seed*.csv"))
    if direct:
        experiments[results_dir.name] = direct
    for sub in sorted(p for p in results_dir.iterdir() if p.is_dir()):
        files = sorted(sub.glob("eval_seed*.csv"))
        if files:
            experiments[sub.name] = files
    return experiments


def cmd_report(args: argparse.Namespace) -> int:
    results_dir = Path(args.results_dir)
    if not results_dir.is_dir():
        return _fail(f"not a directory: {results_dir}", EXIT_BAD_INPUT)
    experiments = _find_experiments(results_dir)
    if not experiments:
        return _fail(f"no eval_seed*.csv matrices under {results_dir}",
                     EXIT_BAD_INPUT)
    report_dir = results_dir / "report"
    report_dir.mkdir(exist_ok=True)
    try:
        for name, files in sorted(experiments.items()):
            matrices = [EvalMatrix.from_csv(f) for f in files]
            cells = aggregate_runs(matrices)
            (report_dir / f"{name}_accuracy_table.csv").write_text(
                _metric_table(cells, "accuracy_mean")
            )
            (report_dir / f"{name}_reward_table.csv").write_text(
                _metric_table(cells, "avg_step_reward_mean")
            )
            (report_dir / f"{name}_accuracy_curve.csv").write_text(
                _accuracy_curve(cells)
            )
            (report_dir / f"{name}_retention.csv").write_text(
                _retention_column(cells)
            )
            print(f"{name}: {len(files)} runs -> 4 report files")
    except ValueError as exc:
        return _fail(str(exc), EXIT_BAD_INPUT)
    return EXIT_OK


# ---------------------------------------------------------------------------
# list
# ---------------------------------------------------------------------------

def cmd_list(args: argparse.Namespace) -> int:
    benchmark = args.benchmark
    if benchmark == "hlr":
        seq = hlr_default_tasks()
        print("index,name,goal_x,goal_y,goal_z,step_budget")
        for i, t in enumerate(seq.tasks):
            x, y, z = t.goal
            print(f"{i},{t.name},{x!r},{y!r},{z!r},{t.step_budget}")
    elif benchmark == "llr":
        seq = llr_default_tasks()
        print("index,name,goal_x,goal_y,goal_z,step_budget")
        for i, t in enumerate(seq.tasks):
            x, y, z = t.goal
            print(f"{i},{t.name},{x!r},{y!r},{z!r},{t.step_budget}")
    elif benchmark == "mlf":
        print("track_id,left,middle,right,led_first,led_second")
        for t in enumerate_tracks("mlf"):
            print(f"{t.track_id},{t.l},{t.m},{t.r},{t.led_first},{t.led_second}")
    elif benchmark == "mpo":
        print("track_id,shape,color,symbol,pushable")
        for t in enumerate_tracks("mpo"):
            print(f"{t.track_id},{t.shape},{t.color},{t.symbol},{t.pushable}")
    else:
        return _fail(f"unknown benchmark {benchmark!r} "
                     "(choose hlr, llr, mlf, or mpo)", EXIT_BAD_INPUT)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinbench",
        description="Kinematics-only continual-RL benchmark runner",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config", help="path to a YAML experiment file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="run only this seed (overrides the config list)")
    run_p.add_argument("--out", default=None,
                       help="output directory (default: config out_dir, else "
                            f"${RESULTS_ENV_VAR}/<config-stem>)")
    run_p.add_argument("--workers", type=int, default=1,
                       help="run seeds in parallel processes")
    run_p.set_defaults(func=cmd_run)

    report_p = sub.add_parser("report", help="regenerate tables from results")
    report_p.add_argument("results_dir", help="directory holding eval_seed*.csv")
    report_p.set_defaults(func=cmd_report)

    list_p = sub.add_parser("list", help="print task/track inventories")
    list_p.add_argument("benchmark", help="hlr | llr | mlf | mpo")
    list_p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
