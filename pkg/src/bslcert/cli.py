"""Command-line front-end.

Exit codes: 0 success, 1 usage/config error, 2 bound violation detected,
3 numerical failure (zero evidence, non-finite values, vacuous bounds, ...).
"""

from __future__ import annotations

import argparse
import json
import sys

from .domains import DomainSpec, Gaussian1D
from .errors import BslError
from .harness import (DEFAULT_DOMAIN, ExperimentConfig, FuzzRecord, RunRecord,
                      emit, run_config, write_meta)
from .metrics import hellinger, tv, w1
from .onlinevi import BetaInputs, VIBoundInputs, vi_bound_type1, vi_bound_type2

USAGE_ERROR, VIOLATION_ERROR, NUMERICAL_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bslcert", description="Sequential Bayesian updating with certified error bounds")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rep = sub.add_parser("reproduce", help="paired posterior chains with per-step bounds")
    rep.add_argument("--case", type=int, choices=(1, 2, 3))
    rep.add_argument("--steps", type=int, default=None)
    rep.add_argument("--seed", type=int, default=None)
    rep.add_argument("--out", default=None)
    rep.add_argument("--trials", type=int, default=None)
    rep.add_argument("--threads", type=int, default=None)
    rep.add_argument("--config", default=None, help="JSON config; flags override its values")

    bv = sub.add_parser("bound-validate", help="exact vs approximate sequence with both bound sets")
    bv.add_argument("--filter", choices=("gauss-proj", "particle"), required=True)
    bv.add_argument("--steps", type=int, default=10)
    bv.add_argument("--seed", type=int, default=0)
    bv.add_argument("--out", default=None)

    rf = sub.add_parser("reduction-fuzz", help="randomized soundness sweep of the reduction checks")
    rf.add_argument("--theorem", choices=("tv", "hellinger", "w1-ip", "w1-dyn"), required=True)
    rf.add_argument("--trials", type=int, default=1000)
    rf.add_argument("--seed", type=int, default=0)

    met = sub.add_parser("metric", help="distance between two distributions")
    met.add_argument("--kind", choices=("tv", "hellinger", "w1"), required=True)
    met.add_argument("--a", required=True, metavar="gaussian:M,V")
    met.add_argument("--b", required=True, metavar="gaussian:M,V")

    vb = sub.add_parser("vi-bound", help="online-VI learning-error bound from a JSON config")
    vb.add_argument("--config", required=True)
    return parser


def _parse_gaussian(text: str) -> Gaussian1D:
    kind, _, rest = text.partition(":")
    if kind != "gaussian" or not rest:
        raise ValueError(f"expected gaussian:MEAN,VARIANCE, got {text!r}")
    try:
        mean_s, var_s = rest.split(",")
        return Gaussian1D(float(mean_s), float(var_s))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad gaussian spec {text!r}: {exc}") from exc


def _metric_domain(a: Gaussian1D, b: Gaussian1D) -> DomainSpec:
    lo = min(DEFAULT_DOMAIN.lower, a.mean - 10 * a.std, b.mean - 10 * b.std)
    hi = max(DEFAULT_DOMAIN.upper, a.mean + 10 * a.std, b.mean + 10 * b.std)
    # narrow densities need spacing well below their width for the |p - q| kink
    spacing = min(0.01, min(a.std, b.std) / 10.0)
    points = min(500001, max(8001, int((hi - lo) / spacing) + 1))
    if lo == DEFAULT_DOMAIN.lower and hi == DEFAULT_DOMAIN.upper and points == 8001:
        return DEFAULT_DOMAIN
    return DomainSpec(lo, hi, points)


def _finish_run(record: RunRecord, out_dir) -> int:
    if out_dir:
        emit(record, "csv", out_dir)
        emit(record, "svg", out_dir)
        write_meta(record, out_dir)
    print(f"{record.experiment}: {len(record.rows)} rows, {record.violations} violations")
    return VIOLATION_ERROR if record.violations else 0


def _cmd_reproduce(args) -> int:
    base = {}
    if args.config:
        base = json.loads(open(args.config, "r", encoding="utf-8").read())
        if not isinstance(base, dict):
            raise ValueError("config file must hold a JSON object")
    if args.case is not None:
        base["experiment"] = f"reproduce_case{args.case}"
    if "experiment" not in base:
        raise ValueError("need --case or an experiment key in the config")
    for key, val in (("steps", args.steps), ("seed", args.seed),
                     ("trials", args.trials), ("threads", args.threads),
                     ("out_dir", args.out)):
        if val is not None:
            base[key] = val
    base.setdefault("steps", 20)
    config = ExperimentConfig(**{k: v for k, v in base.items()
                                 if k in ExperimentConfig.__dataclass_fields__})
    record = run_config(config)
    return _finish_run(record, config.out_dir)


def _cmd_bound_validate(args) -> int:
    config = ExperimentConfig(experiment="bound_validate", steps=args.steps, seed=args.seed,
                              filter_kind=args.filter.replace("-", "_"), out_dir=args.out)
    record = run_config(config)
    return _finish_run(record, config.out_dir)


def _cmd_reduction_fuzz(args) -> int:
    config = ExperimentConfig(experiment="reduction_fuzz", theorem=args.theorem,
                              trials=args.trials, seed=args.seed)
    record: FuzzRecord = run_config(config)
    print(f"reduction_fuzz[{record.theorem}]: {record.trials} trials, "
          f"{record.guaranteed} guaranteed, {record.violations} violations")
    return VIOLATION_ERROR if record.violations else 0


def _cmd_metric(args) -> int:
    a = _parse_gaussian(args.a)
    b = _parse_gaussian(args.b)
    domain = _metric_domain(a, b)
    fn = {"tv": tv, "hellinger": hellinger, "w1": w1}[args.kind]
    print(repr(fn(a, b, domain).value))
    return 0


def _cmd_vi_bound(args) -> int:
    raw = json.loads(open(args.config, "r", encoding="utf-8").read())
    if not isinstance(raw, dict):
        raise ValueError("vi-bound config must hold a JSON object")
    metric = raw.get("metric", "tv")
    bound_type = int(raw.get("bound_type", 1))
    betas = raw.get("beta_inputs")
    inputs = VIBoundInputs(
        r=int(raw["r"]), det_gamma=float(raw["det_gamma"]),
        elbo_floors=tuple(raw["elbo_floors"]), evidences=tuple(raw["evidences"]),
        d=float(raw["d"]) if raw.get("d") is not None else None,
        beta_inputs=tuple(BetaInputs(float(b["c_vi_tilde"]), float(b["w_err"]),
                                     float(b["z_hat"])) for b in betas) if betas else None)
    if bound_type == 1:
        value = vi_bound_type1(inputs, metric)
    elif bound_type == 2:
        value = vi_bound_type2(inputs, metric)
    else:
        raise ValueError(f"bound_type must be 1 or 2, got {bound_type}")
    print(repr(value))
    return 0


_COMMANDS = {
    "reproduce": _cmd_reproduce,
    "bound-validate": _cmd_bound_validate,
    "reduction-fuzz": _cmd_reduction_fuzz,
    "metric": _cmd_metric,
    "vi-bound": _cmd_vi_bound,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"bslcert: config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except BslError as exc:
        print(f"bslcert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
