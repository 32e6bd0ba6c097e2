#!/usr/bin/env python3
"""Joint discretization ablation: 5 versus 9 angles per joint.

Runs the single-task protocol on all eight joint-space goals at both
action counts and compares mean success rates.  The five-angle lattice
is a subset of the nine-angle one, so every goal stays exactly
reachable; the larger search space (9^7 vs 5^7 configurations) is the
only difference.
"""
import argparse
import dataclasses
import tempfile
import time
from pathlib import Path

import numpy as np

from kinbench import llr_default_tasks, save_task_sequence
from kinbench.config import load_config
from kinbench.env import TaskSequence
from kinbench.harness import run_sequence


def run_variant(config, n_actions, seeds):
    full = llr_default_tasks()
    accuracies = []
    with tempfile.TemporaryDirectory() as tmp:
        for index, task in enumerate(full.tasks):
            path = Path(tmp) / f"task{index}.yaml"
            save_task_sequence(
                TaskSequence(tasks=(task,), global_seed=full.global_seed),
                path,
            )
            single = dataclasses.replace(
                config, tasks=str(path), n_tasks=None,
                env=dataclasses.replace(config.env, n_actions=n_actions),
            )
            for seed in seeds:
                record = run_sequence(single, run_seed=seed).final_row()[0]
                accuracies.append(record.accuracy)
    return float(np.mean(accuracies))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/llr_single_task.yaml",
                        help="single-task template to run both variants from")
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2])
    args = parser.parse_args()

    config = load_config(args.config)
    seeds = tuple(args.seeds)
    started = time.time()
    five = run_variant(config, 5, seeds)
    nine = run_variant(config, 9, seeds)
    print(f"mean success over 8 goals x {len(seeds)} seeds:")
    print(f"  5 angles per joint: {five:.4f}")
    print(f"  9 angles per joint: {nine:.4f}")
    print(f"finer discretization {'hurts' if nine < five else 'does not hurt'}"
          f"  ({time.time() - started:.0f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
