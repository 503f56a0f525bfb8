"""Command-line front end.

  fairsel run   --config cfg.json [--seed N] [--profile fast|full] [--out DIR]
  fairsel opt   --config cfg.json [--out DIR]
  fairsel sweep --config cfg.json [--seed N] [--profile fast|full] [--out DIR]
  fairsel check --config cfg.json

run executes the configured policy and writes rounds/fractions/convergence
CSVs (plus bound certificates for the continuous-greedy variants) and a
manifest; opt solves the stationary LP and writes its support; sweep rescales
the fairness floors over the configured betas and compares every fair policy
against the LP optimum; check validates the oracle structure and floor
feasibility, exiting non-zero on failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import PROFILES, load_config
from .core import SizeLimitError, format_float
from .oracles import check_submodular_monotone
from .runner import execute_run, run_opt, run_sweep, write_run_outputs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairsel",
        description="multi-round fair worker selection: run policies, solve the "
        "stationary LP, sweep fairness levels, check oracle structure",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "opt", "sweep", "check"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON config file")
        if name in ("run", "sweep"):
            cmd.add_argument("--seed", type=int, default=None, help="override master_seed")
            cmd.add_argument(
                "--profile",
                choices=sorted(PROFILES),
                default=None,
                help="fast (default) or full reference-scale settings",
            )
        if name in ("run", "opt", "sweep"):
            cmd.add_argument("--out", default="out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(
        args.config,
        profile=getattr(args, "profile", None),
        seed=getattr(args, "seed", None),
    )

    if args.command == "run":
        result = execute_run(config)
        paths = write_run_outputs(result, args.out)
        print(f"policy={config.policy} horizon={config.horizon} seed={config.master_seed}")
        print(f"mean_utility={format_float(result.trace.mean_utility())}")
        if result.lp is not None:
            print(f"u_opt={format_float(result.lp.u_opt)}")
        print(f"fairness_satisfied={'yes' if result.fairness.all_satisfied else 'no'}")
        for path in paths:
            print(f"wrote {path}")
        return 0

    if args.command == "opt":
        solution = run_opt(config, out_dir=args.out)
        if solution.status != "optimal":
            print("status=infeasible")
            return 1
        print(f"u_opt={format_float(solution.u_opt)}")
        print(f"support_size={len(solution.support)}")
        print(f"wrote {Path(args.out) / 'support.csv'}")
        return 0

    if args.command == "sweep":
        rows = run_sweep(config, out_dir=args.out)
        for row in rows:
            if row.status != "ok":
                print(f"beta={row.beta:g} {row.policy}: {row.status}")
            else:
                print(
                    f"beta={row.beta:g} {row.policy}: ratio={row.empirical_ratio:.4f}"
                )
        print(f"wrote {Path(args.out) / 'sweep.csv'}")
        return 0

    # check
    pool = config.build_pool()
    oracle = config.build_oracle()
    feasible = pool.is_feasible()
    print(f"floors_sum={format_float(float(pool.fairness.sum()))} budget={pool.k}")
    print(f"feasible={'yes' if feasible else 'no'}")
    try:
        report = check_submodular_monotone(oracle, pool)
    except SizeLimitError as exc:
        print(f"structure check skipped: {exc}")
        return 0 if feasible else 1
    print(f"monotone={'yes' if report.monotone else 'no'}")
    print(f"submodular={'yes' if report.submodular else 'no'}")
    if report.monotone_witness is not None:
        print(f"monotone_witness={report.monotone_witness}")
    if report.submodular_witness is not None:
        print(f"submodular_witness={report.submodular_witness}")
    return 0 if (feasible and report.ok) else 1


if __name__ == "__main__":
    sys.exit(main())
