#!/usr/bin/env python3
"""Validate both cumulative bound sets against measured learning errors.

Runs the Gaussian-projection filter on the two-bump inverse problem (TV and
Hellinger) and the bootstrap particle filter on the linear-Gaussian state
system (Wasserstein), then writes per-step CSV/SVG under --out.
"""

import argparse
import sys

from bslcert.harness import bound_validate, emit, write_meta


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--particles", type=int, default=2000)
    ap.add_argument("--out", default="out/bound_validation")
    args = ap.parse_args()

    total = 0
    for kind in ("gauss_proj", "particle"):
        kwargs = {"n_particles": args.particles} if kind == "particle" else {}
        rec = bound_validate(kind, args.steps, args.seed, **kwargs)
        out_dir = f"{args.out}/{kind}"
        emit(rec, "csv", out_dir)
        emit(rec, "svg", out_dir)
        write_meta(rec, out_dir)
        total += rec.violations
        print(f"{kind}: {len(rec.rows)} rows, {rec.violations} violations -> {out_dir}")
    return 2 if total else 0


if __name__ == "__main__":
    sys.exit(main())
