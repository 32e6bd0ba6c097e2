#!/usr/bin/env python3
"""Regenerate the packaged default task files from their generators.

The shipped YAML files under src/kinbench/data/ are derived artifacts;
this script rewrites them so they can never drift from the generator
output (tests/test_arm.py asserts the equality).
"""
import argparse
from pathlib import Path

from kinbench import hlr_default_tasks, llr_default_tasks, save_task_sequence

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "kinbench" / "data"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(DATA_DIR),
                        help="directory to write the task files into")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, seq in (("hlr_tasks.yaml", hlr_default_tasks()),
                      ("llr_tasks.yaml", llr_default_tasks())):
        path = out / name
        save_task_sequence(seq, path)
        print(f"wrote {path} ({len(seq)} tasks)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
