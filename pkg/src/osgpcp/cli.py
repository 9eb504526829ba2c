"""Command line interface: ``osgpcp run`` and ``osgpcp summarize``."""

from __future__ import annotations

import argparse
import sys

from . import bench


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osgpcp",
        description="Online scalable GP regression with conformal prediction intervals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one streaming experiment and write a trace CSV")
    run.add_argument("--dataset", choices=("iid", "shift", "csv"), default="iid")
    run.add_argument("--csv-path", default=None, help="input CSV for --dataset csv")
    run.add_argument("--feature-columns", default="open,high,low",
                     help="comma-separated feature column names for CSV input")
    run.add_argument("--target-column", default="close")
    run.add_argument("--n", type=int, default=10000, help="synthetic stream length")
    run.add_argument("--alpha", type=float, default=0.1, help="target miscoverage")
    run.add_argument("--features", type=int, default=200, help="number of spectral features D")
    run.add_argument("--warmup", type=int, default=100, help="records used for the hyperparameter fit")
    run.add_argument("--eta-mode", choices=("constant", "decaying_with_reset"), default="constant")
    run.add_argument("--eta", type=float, default=0.05, help="constant-mode learning rate")
    run.add_argument("--window", type=int, default=15, help="change-point window W")
    run.add_argument("--consecutive", type=int, default=100, help="consecutive increases r to fire a reset")
    run.add_argument("--clip-b", type=float, default=20.0, help="score clip bound B")
    run.add_argument("--seed-features", type=int, default=1)
    run.add_argument("--seed-data", type=int, default=2)
    run.add_argument("--out", required=True, help="trace CSV output path")

    summ = sub.add_parser("summarize", help="print per-method coverage and set size for a trace CSV")
    summ.add_argument("trace", help="trace CSV written by `osgpcp run`")
    return parser


def _print_summary(summary: dict) -> None:
    print(f"{'method':<14}{'final_coverage':>16}{'mean_set_size':>16}")
    for method, stats in summary.items():
        print(f"{method:<14}{stats['final_coverage']:>16.4f}{stats['mean_set_size']:>16.4f}")
    print(f"resets: {int(summary['osgpcp']['resets'])}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        config = bench.ExperimentConfig(
            dataset=args.dataset,
            csv_path=args.csv_path,
            feature_columns=tuple(c.strip() for c in args.feature_columns.split(",") if c.strip()),
            target_column=args.target_column,
            n=args.n,
            alpha=args.alpha,
            D=args.features,
            warmup=args.warmup,
            eta_mode=args.eta_mode,
            eta_const=args.eta,
            W=args.window,
            r=args.consecutive,
            B=args.clip_b,
            seed_features=args.seed_features,
            seed_data=args.seed_data,
        )
        result = bench.run_experiment(config)
        bench.write_trace(result, args.out)
        print(f"wrote {len(result.rows)} rows to {args.out} (sidecar {bench.sidecar_path(args.out)})")
        _print_summary(bench.summarize(result.rows))
    else:
        rows = bench.read_trace(args.trace)
        if not rows:
            print("trace is empty")
            return 1
        _print_summary(bench.summarize(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
