# =============================================================
# src/cli/baseline.py
#
# Flat PPO baselines, same metrics schema as MLSH runs:
#   shared    one policy trained across the task distribution
#   scratch   a fresh policy per held-out task
#   finetune  shared training, then per-task fine-tuning (on
#             the transfer env when the preset has one)
# =============================================================

import argparse

from loguru import logger

from src.cli.common import add_config_args, load_config, output_dir, with_updates, write_snapshot
from src.engine.adapt import run_baseline


def register(subparsers) -> None:
    p = subparsers.add_parser("baseline", help="Train a flat PPO baseline")
    p.add_argument("kind", choices=["shared", "scratch", "finetune"])
    add_config_args(p)
    p.add_argument("--budget", type=int,
                   help="Per-task iterations for scratch/finetune, meta-iterations for shared")
    p.set_defaults(command=cmd_baseline)


def cmd_baseline(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    if args.budget is not None:
        field = "meta_iterations" if args.kind == "shared" else "adapt_budget"
        cfg = with_updates(cfg, **{field: args.budget})
    out = output_dir(args, cfg, args.kind)
    write_snapshot(cfg, out)

    records = run_baseline(args.kind, cfg, out)
    logger.info(f"Baseline saved | kind={args.kind} out={out} records={len(records)}")
