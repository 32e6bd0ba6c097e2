#!/usr/bin/env python3
"""Single-task solvability protocol: train on each task separately.

Takes a single-task experiment config (an ``n_tasks: 1`` template such as
configs/hlr_single_task.yaml or configs/llr_single_task.yaml), re-targets
it at every default task of its benchmark in turn, and tabulates the
final greedy accuracy and episode reward per (task, seed).

A task counts as solved in a seed when accuracy is 1.0 — every
evaluation episode reaches the goal tolerance.
"""
import argparse
import dataclasses
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from kinbench import save_task_sequence
from kinbench.config import load_config
from kinbench.env import TaskSequence
from kinbench.harness import build_task_sequence, run_sequence


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", help="single-task experiment YAML")
    parser.add_argument("--seeds", type=int, nargs="+", default=None,
                        help="override the config's seed list")
    args = parser.parse_args()

    config = load_config(args.config)
    if config.benchmark not in ("hlr", "llr"):
        print("error: the single-task protocol covers the arm benchmarks",
              file=sys.stderr)
        return 1
    seeds = tuple(args.seeds) if args.seeds else config.seeds
    need = -(-2 * len(seeds) // 3)  # ceil: at least 2/3 of the seeds
    full = build_task_sequence(
        dataclasses.replace(config, tasks="default", n_tasks=None)
    )

    print(f"{'task':12s} " + " ".join(f"seed{s:<4d}" for s in seeds)
          + " solved  mean reward")
    started = time.time()
    solved_tasks = 0
    with tempfile.TemporaryDirectory() as tmp:
        for index, task in enumerate(full.tasks):
            path = Path(tmp) / f"task{index}.yaml"
            save_task_sequence(
                TaskSequence(tasks=(task,), global_seed=full.global_seed),
                path,
            )
            single = dataclasses.replace(config, tasks=str(path),
                                         n_tasks=None)
            accs, rewards = [], []
            for seed in seeds:
                record = run_sequence(single, run_seed=seed).final_row()[0]
                accs.append(record.accuracy)
                rewards.append(record.avg_episode_reward)
            n_solved = sum(1 for a in accs if a == 1.0)
            solved_tasks += n_solved >= need
            cells = " ".join(f"{a:7.2f}" for a in accs)
            print(f"{task.name:12s} {cells}  {n_solved}/{len(seeds)}"
                  f"    {np.mean(rewards):.3f}")
    print(f"tasks solved in >={need}/{len(seeds)} seeds: "
          f"{solved_tasks}/{len(full.tasks)}  ({time.time() - started:.0f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
