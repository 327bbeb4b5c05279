# =============================================================
# src/cli/adapt.py
#
#   python -m src.main adapt --preset fourrooms --checkpoint runs/.../phi_final.ckpt
#   python -m src.main adapt --preset obstacle-transfer --checkpoint ...   (sparse maze)
#
# Loads φ, freezes it, and trains a fresh master on each
# held-out task. Target env: --target, else the preset's
# transfer env, else its training env.
# =============================================================

import argparse

from loguru import logger

from src.cli.common import add_config_args, load_config, output_dir, with_updates, write_snapshot
from src.cli.export import curve_frame
from src.core.errors import ConfigError
from src.engine.adapt import adapt_all, check_fits
from src.engine.metrics import METRICS_FILE
from src.envs.registry import known_envs
from src.hierarchy.policies import SubPolicySet
from src.nn.checkpoint import load_checkpoint

CURVE_FILE = "curve.csv"


def register(subparsers) -> None:
    p = subparsers.add_parser("adapt", help="Test-time adaptation with frozen sub-policies")
    add_config_args(p)
    p.add_argument("--checkpoint", type=str, required=True, help="Sub-policy checkpoint (.ckpt)")
    p.add_argument("--target", type=str, help=f"Env to adapt on: {', '.join(known_envs())}")
    p.add_argument("--budget", type=int, help="θ-only iterations per task")
    p.set_defaults(command=cmd_adapt)


def cmd_adapt(args: argparse.Namespace) -> None:
    cfg    = load_config(args)
    ckpt   = load_checkpoint(args.checkpoint)
    subs   = SubPolicySet.from_nets(ckpt.subs)
    target = args.target or cfg.transfer_env or cfg.env
    try:
        check_fits(subs, target)
    except ConfigError as e:
        raise ConfigError(f"{args.checkpoint} (trained on '{ckpt.header.env}') does not fit: {e}") from e
    if subs.K != cfg.K:
        logger.warning(f"Checkpoint K={subs.K} differs from config K={cfg.K}; using the checkpoint")

    if args.budget is not None:
        cfg = with_updates(cfg, adapt_budget=args.budget)
    budget = cfg.adapt_budget
    out = output_dir(args, cfg, f"adapt-{target}")
    write_snapshot(cfg, out)

    adapt_all(subs, cfg, budget, env=target, out_dir=out)
    curve_frame([out / METRICS_FILE]).to_csv(out / CURVE_FILE, index=False)
    logger.info(f"Adaptation saved | target={target} budget={budget} tasks={cfg.eval_tasks} out={out}")
