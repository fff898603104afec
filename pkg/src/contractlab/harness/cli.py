"""Command-line interface.

Subcommands: train, eval, baseline, oracle, export, plot-data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .metrics import moving_average_table, read_metrics
from .runners import (run_baseline, run_eval, run_export, run_oracle,
                      run_train)


def _print_summary(summary: dict) -> None:
    if summary.get("mean_reward") is None:
        print("no episodes evaluated")
        return
    print(f"mean reward: {summary['mean_reward']:.4f} "
          f"+/- {summary['std_reward']:.4f}")
    print(f"feasibility rate: {summary['feasibility_rate']:.3f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contractlab",
        description="Incentive-contract design: training, evaluation, "
                    "oracles, and export.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy per config")
    p.add_argument("config")
    p.add_argument("--resume", help="checkpoint to continue from")

    p = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("config")
    p.add_argument("--episodes", type=int, default=100)

    p = sub.add_parser("baseline", help="evaluate a reference scheme")
    p.add_argument("kind", choices=["random", "average", "complete_info",
                                    "grid_oracle"])
    p.add_argument("config")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--resolution", type=int, default=200)

    p = sub.add_parser("oracle", help="grid-search optimum for one instance")
    p.add_argument("config")
    p.add_argument("--resolution", type=int, default=200)

    p = sub.add_parser("export", help="export the designed contract schedule")
    p.add_argument("checkpoint")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--owner", default="0x0")

    p = sub.add_parser("plot-data",
                       help="smoothed reward table from a metrics log")
    p.add_argument("metrics")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        cfg = load_config(args.config)
        ckpt = run_train(cfg, resume=args.resume)
        print(f"checkpoint written to {ckpt}")
    elif args.command == "eval":
        cfg = load_config(args.config)
        _print_summary(run_eval(args.checkpoint, cfg, args.episodes))
    elif args.command == "baseline":
        cfg = load_config(args.config)
        summary = run_baseline(args.kind, cfg, args.episodes,
                               resolution=args.resolution)
        print(f"baseline: {summary['kind']}")
        _print_summary(summary)
    elif args.command == "oracle":
        cfg = load_config(args.config)
        result = run_oracle(cfg, resolution=args.resolution)
        print(f"best rewards: {result['rewards']}")
        print(f"best value: {result['value']:.6f}")
    elif args.command == "export":
        cfg = load_config(args.config)
        out = run_export(args.checkpoint, cfg, out_path=args.out,
                         owner=args.owner)
        print(f"export written to {out}")
    elif args.command == "plot-data":
        rows = moving_average_table(read_metrics(args.metrics),
                                    window=args.window)
        lines = ["episode,train_reward_smoothed,test_reward"]
        lines += [f"{ep},{tr!r},{'' if te is None else repr(te)}"
                  for ep, tr, te in rows]
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
