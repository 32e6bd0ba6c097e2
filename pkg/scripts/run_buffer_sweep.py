#!/usr/bin/env python3
"""Replay-buffer sweep on the sequential point-reaching run.

Runs the 10-task sequence at several buffer capacities and reports the
mean final all-task accuracy per capacity (mean ± sample std over seeds):
small buffers forget earlier tasks, larger buffers retain them.
"""
import argparse
import dataclasses
import time

import numpy as np

from kinbench.config import load_config
from kinbench.harness import run_sequence


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config",
                        help="sequential experiment YAML to sweep "
                             "(e.g. configs/hlr_sequential_buffer5000.yaml)")
    parser.add_argument("--buffers", type=int, nargs="+",
                        default=[5000, 10000, 50000])
    parser.add_argument("--seeds", type=int, nargs="+", default=None)
    args = parser.parse_args()

    config = load_config(args.config)
    seeds = tuple(args.seeds) if args.seeds else config.seeds

    print(f"{'buffer':>8s}  final all-task accuracy (mean ± std over "
          f"{len(seeds)} seeds)")
    started = time.time()
    for buffer in args.buffers:
        swept = dataclasses.replace(
            config, agent=dataclasses.replace(config.agent,
                                              buffer_capacity=buffer)
        )
        finals = []
        for seed in seeds:
            matrix = run_sequence(swept, run_seed=seed)
            finals.append(float(np.mean(
                [r.accuracy for r in matrix.final_row()])))
        spread = float(np.std(finals, ddof=1)) if len(finals) > 1 else 0.0
        print(f"{buffer:>8d}  {np.mean(finals):.3f} ± {spread:.3f}"
              f"   {[f'{f:.2f}' for f in finals]}")
    print(f"({time.time() - started:.0f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
