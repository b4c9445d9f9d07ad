#!/usr/bin/env python3
"""Run the three paired-chain reproduction cases and write CSV/SVG output.

Usage: python3 scripts/run_reproduction.py [--steps N] [--seed S] [--out DIR]
"""

import argparse
import sys

from bslcert.harness import emit, reproduce, write_meta


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials-case3", type=int, default=200)
    ap.add_argument("--out", default="out/reproduction")
    args = ap.parse_args()

    total_violations = 0
    for case in (1, 2, 3):
        trials = args.trials_case3 if case == 3 else 1
        rec = reproduce(case, args.steps, args.seed, trials=trials, threads=4)
        out_dir = f"{args.out}/case{case}"
        emit(rec, "csv", out_dir)
        emit(rec, "svg", out_dir)
        write_meta(rec, out_dir)
        total_violations += rec.violations
        print(f"case {case}: {len(rec.rows)} rows, {rec.violations} violations -> {out_dir}")
    return 2 if total_violations else 0


if __name__ == "__main__":
    sys.exit(main())
