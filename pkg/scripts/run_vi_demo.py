#!/usr/bin/env python3
"""Online-VI bound demo on the 1-D parameter-state toy."""

import argparse
import sys

from bslcert.harness import emit, vi_demo, write_meta


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/vi_demo")
    args = ap.parse_args()

    rec = vi_demo(args.steps, args.seed)
    emit(rec, "csv", args.out)
    emit(rec, "svg", args.out)
    write_meta(rec, args.out)
    for r in rec.rows:
        print(f"step {r.step}: distance {r.distance:.5f}  bound {r.bound:.5f}")
    print(f"{rec.violations} violations -> {args.out}")
    return 2 if rec.violations else 0


if __name__ == "__main__":
    sys.exit(main())
