# =============================================================
# src/cli/train.py
#
#   python -m src.main train --preset bandits --seed 1
#   python -m src.main train --preset bandits --set W=0     (no warmup)
#   python -m src.main train --preset bandits --set N=1     (same timescale)
#
# Writes <out>/config.json, metrics.jsonl, timings.jsonl and
# checkpoints/phi_*.ckpt.
# =============================================================

import argparse

from loguru import logger

from src.cli.common import add_config_args, load_config, output_dir, with_updates, write_snapshot
from src.engine.harness import meta_loop

TRAJECTORY_FILE = "trajectories.jsonl"


def register(subparsers) -> None:
    p = subparsers.add_parser("train", help="Meta-train shared sub-policies")
    add_config_args(p)
    p.add_argument("--budget", type=int, help="Meta-iteration budget (overrides the config)")
    p.add_argument("--dump-trajectories", action="store_true",
                   help="Write every primitive step to trajectories.jsonl")
    p.set_defaults(command=cmd_train)


def cmd_train(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    if args.budget is not None:
        cfg = with_updates(cfg, meta_iterations=args.budget)
    out = output_dir(args, cfg, "train")
    write_snapshot(cfg, out)

    if args.dump_trajectories:
        with open(out / TRAJECTORY_FILE, "w", encoding="utf-8") as sink:
            result = meta_loop(cfg, out, trajectory_sink=sink)
    else:
        result = meta_loop(cfg, out)

    logger.info(
        f"Training run saved | out={out} iterations={result.iterations} "
        f"checkpoints={len(result.checkpoints)} stopped_early={result.stopped_early}"
    )
