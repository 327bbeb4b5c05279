# =============================================================
# src/cli/inspect.py
#
#   python -m src.main inspect --checkpoint runs/.../phi_final.ckpt
#
# Writes specialization.json and arrows.csv for a φ checkpoint.
# The env comes from the checkpoint header; probes are seeded
# from --seed so two checkpoints can be compared on the same
# probe states.
# =============================================================

import argparse

import pandas as pd
from loguru import logger

from src.cli.common import add_config_args, load_config, output_dir
from src.core.rng import EVAL_TASK, stream
from src.engine.adapt import eval_tasks
from src.hierarchy.policies import SubPolicySet
from src.hierarchy.specialization import bandit_arrows, bandit_report, grid_arrows, grid_report
from src.nn.checkpoint import load_checkpoint

REPORT_FILE = "specialization.json"
ARROWS_FILE = "arrows.csv"


def register(subparsers) -> None:
    p = subparsers.add_parser("inspect", help="Report what each sub-policy does")
    add_config_args(p)
    p.add_argument("--checkpoint", type=str, required=True, help="Sub-policy checkpoint (.ckpt)")
    p.set_defaults(command=cmd_inspect)


def cmd_inspect(args: argparse.Namespace) -> None:
    cfg  = load_config(args)
    ckpt = load_checkpoint(args.checkpoint)
    subs = SubPolicySet.from_nets(ckpt.subs)
    env  = ckpt.header.env
    probe_task = eval_tasks(cfg, env, n=1)[0]

    if env == "bandits":
        report = bandit_report(subs, stream(cfg.seed, EVAL_TASK, 1))
        arrows = bandit_arrows(subs, probe_task)
    else:
        report = grid_report(subs, probe_task)
        arrows = grid_arrows(subs, probe_task)

    out = output_dir(args, cfg, "inspect")
    (out / REPORT_FILE).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    pd.DataFrame(arrows, columns=["sub_policy", "x", "y", "action", "dx", "dy"]).to_csv(
        out / ARROWS_FILE, index=False
    )
    for p in report.sub_policies:
        logger.info(
            f"Sub-policy {p.sub_policy} | greedy={p.greedy_histogram} "
            f"goal_approach={p.goal_approach} majority_goal={p.majority_goal} score={p.score}"
        )
    logger.info(f"Inspection saved | env={env} K={report.K} score={report.score} distinct={report.distinct} out={out}")
