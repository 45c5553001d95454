"""Command-line interface.

    steinclt run --config cfg.yaml --out results.csv [--seed N] [--threads K]
    steinclt verify --config cfg.yaml
    steinclt bound --family rademacher --d 1 --n 100
    steinclt report --results results.csv --out-dir report/

Exit codes: 0 success, 1 verification failure, 2 configuration error.
The STEINCLT_THREADS environment variable overrides any configured or
flag-passed thread count. No network access is ever required.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .experiment import (ConfigError, ExperimentConfig, format_csv,
                         load_config, run_experiment, run_verify, write_csv)
from .families import FAMILIES, make_model


def _resolve_threads(cfg: ExperimentConfig, flag) -> int:
    env = os.environ.get("STEINCLT_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"STEINCLT_THREADS must be an integer: {env!r}") from exc
    if flag is not None:
        return max(1, int(flag))
    return cfg.threads


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = int(args.seed)
    if args.out is not None:
        updates["out"] = args.out
    updates["threads"] = _resolve_threads(cfg, args.threads)
    cfg = dataclasses.replace(cfg, **updates)
    rows, footers = run_experiment(cfg)
    write_csv(rows, footers, cfg.out)
    print(f"wrote {len(rows)} rows to {cfg.out}")
    for line in footers:
        print(line)
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    results = run_verify(cfg)
    failed = []
    for res in results:
        print(res.line())
        if res.status == "fail":
            failed.append(res.name)
    n_pass = sum(r.status == "pass" for r in results)
    n_inc = sum(r.status == "inconclusive" for r in results)
    print(f"{n_pass}/{len(results)} checks passed"
          + (f", {n_inc} inconclusive" if n_inc else ""))
    if failed:
        print("FAILED: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def cmd_bound(args) -> int:
    from .bounds import bound_m1, bound_m2, bound_m3
    if args.family not in FAMILIES:
        raise ConfigError(
            f"unknown family {args.family!r}; available: {', '.join(FAMILIES)}")
    if args.d < 1 or args.n < 1:
        raise ConfigError("--d and --n must be positive")
    model = make_model(args.family, args.d, args.n, seed=args.seed)
    b1 = bound_m1(model).total
    b2 = bound_m2(model).total
    b3 = bound_m3(model).total
    print("family,d,n,bound_m1,bound_m2,bound_m3")
    print(f"{args.family},{args.d},{args.n},{b1:.12g},{b2:.12g},{b3:.12g}")
    return 0


def cmd_report(args) -> int:
    from .report import render_report
    paths = render_report(args.results, args.out_dir)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinclt",
        description="Normal-approximation error bounds for independent sums, "
                    "with Monte Carlo verification and exact empirical W1.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment sweep to CSV")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run the identity/property battery")
    p_ver.add_argument("--config", required=True)
    p_ver.set_defaults(func=cmd_verify)

    p_bnd = sub.add_parser("bound", help="print the three bounds as CSV")
    p_bnd.add_argument("--family", required=True)
    p_bnd.add_argument("--d", type=int, required=True)
    p_bnd.add_argument("--n", type=int, required=True)
    p_bnd.add_argument("--seed", type=int, default=0)
    p_bnd.set_defaults(func=cmd_bound)

    p_rep = sub.add_parser("report", help="render figures from a results CSV")
    p_rep.add_argument("--results", required=True)
    p_rep.add_argument("--out-dir", required=True)
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
