# =============================================================
# src/cli/common.py
#
# Shared plumbing for every sub-command:
#   - the config flags (--preset / --config / --set / --seed)
#   - where outputs go (--out, else OUTPUT_ROOT/<run name>)
#   - the config snapshot written next to every run
#   - exception → exit code
#
# EXIT CODES:
#   0  success
#   1  configuration problem (bad preset, override, file,
#      checkpoint/env mismatch, pydantic validation)
#   2  runtime abort (NaN, worker failure, env failure)
# =============================================================

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path
from typing import Callable, Optional

from loguru import logger
from pydantic import ValidationError

from src.config import settings
from src.core.errors import ConfigError, MlshError
from src.schemas.experiment import MlshConfig, build_config, preset_names

EXIT_OK      = 0
EXIT_CONFIG  = 1
EXIT_RUNTIME = 2

SNAPSHOT_FILE = "config.json"


class CliParser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1, not argparse's default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", type=str,
                        help=f"Built-in experiment preset: {', '.join(preset_names())} (default: bandits)")
    parser.add_argument("--config", type=str, help="Path to a JSON experiment config")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config value, e.g. --set W=0 --set master_ppo.lr=0.02")
    parser.add_argument("--seed", type=int, help="Random seed for this run")
    parser.add_argument("--out", type=str, help="Output directory")


def load_config(args: argparse.Namespace) -> MlshConfig:
    return build_config(preset=args.preset, path=args.config, overrides=args.overrides, seed=args.seed)


def with_updates(cfg: MlshConfig, **update) -> MlshConfig:
    """cfg with command-line values applied, validated like any other config."""
    try:
        return MlshConfig.model_validate({**cfg.model_dump(), **update})
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config:\n{e}") from e


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", text).strip("_")


def output_dir(args: argparse.Namespace, cfg: MlshConfig, command: str) -> Path:
    out = Path(args.out) if args.out else Path(settings.OUTPUT_ROOT) / _slug(f"{cfg.label}_{command}_s{cfg.seed}")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out}: {e}") from e
    return out


def write_snapshot(cfg: MlshConfig, out: Path) -> Path:
    """Effective config, in the same format --config reads."""
    path = out / SNAPSHOT_FILE
    path.write_text(cfg.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def run_guarded(command: Callable[[argparse.Namespace], Optional[int]], args: argparse.Namespace) -> int:
    try:
        code = command(args)
        return EXIT_OK if code is None else code
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except MlshError as e:
        logger.error(f"Run aborted: {e}")
        return EXIT_RUNTIME
