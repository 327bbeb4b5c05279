# =============================================================
# src/main.py
#
# Command-line entry point.
#
#   python -m src.main train     meta-train sub-policies
#   python -m src.main baseline  flat PPO baselines
#   python -m src.main adapt     θ-only adaptation with frozen φ
#   python -m src.main export    merge learning curves to CSV
#   python -m src.main inspect   sub-policy specialization report
#
# Each sub-command lives in src/cli/<name>.py and registers
# its own parser; this file only wires them together.
# =============================================================

import argparse
import sys
from typing import Optional

from src.cli import adapt, baseline, export, inspect, train
from src.cli.common import CliParser, run_guarded
from src.config import settings
from src.core.log_setup import configure_logging


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="python -m src.main",
        description="Meta-learning shared hierarchies: train, adapt, compare, inspect.",
    )
    subparsers = parser.add_subparsers(dest="name", required=True)
    for module in (train, baseline, adapt, export, inspect):
        module.register(subparsers)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    configure_logging(settings.LOG_LEVEL)
    args = build_parser().parse_args(argv)
    return run_guarded(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
