#!/usr/bin/env python3
"""Randomized soundness sweep of the error-reduction certificates."""

import argparse
import sys

from bslcert.harness import reduction_fuzz


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    bad = 0
    for theorem in ("tv", "hellinger", "w1-ip", "w1-dyn"):
        rec = reduction_fuzz(theorem, args.trials, args.seed)
        bad += rec.violations
        print(f"{theorem:>10}: {rec.trials} trials, {rec.guaranteed} guaranteed, "
              f"{rec.violations} violations, worst excess {rec.worst_excess:.3g}")
    return 2 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
