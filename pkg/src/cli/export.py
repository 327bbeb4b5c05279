# =============================================================
# src/cli/export.py
#
#   python -m src.main export runs/a runs/b runs/c --out curves.csv
#
# Merges the metrics.jsonl of several runs into one plot-ready
# CSV: one row per (label, timesteps) with the mean return
# across seeds and its standard error.
#
# PER RUN: mean_return is first averaged over the groups (or
# held-out tasks) at each timestep, giving one series per run.
# ACROSS RUNS with the same label: mean, stderr = std(ddof=1)/√n
# (0 for a single run), seeds = n.
#
# Every line is validated as a MetricRecord; a file that is not
# a metrics stream fails with its name in the message.
# =============================================================

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from src.core.errors import ConfigError
from src.engine.metrics import METRICS_FILE
from src.schemas.records import MetricRecord

CURVE_COLUMNS = ["label", "timesteps", "mean_return", "stderr", "seeds"]


def register(subparsers) -> None:
    p = subparsers.add_parser("export", help="Merge learning curves into one CSV")
    p.add_argument("runs", nargs="+", help="Run directories (or metrics.jsonl files)")
    p.add_argument("--out", type=str, default="curves.csv", help="Output CSV path")
    p.set_defaults(command=cmd_export)


def metrics_path(run: str | Path) -> Path:
    path = Path(run)
    return path / METRICS_FILE if path.is_dir() else path


def load_metrics(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise ConfigError(f"metrics file not found: {path}")
    rows = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(MetricRecord.model_validate_json(line).model_dump())
        except ValidationError as e:
            raise ConfigError(f"{path}: line {n} is not a metrics record ({e.error_count()} errors)") from e
    if not rows:
        raise ConfigError(f"{path}: no metric records")
    return pd.DataFrame(rows)


def run_series(df: pd.DataFrame) -> pd.DataFrame:
    """One run → mean over groups per (label, timesteps)."""
    return df.groupby(["label", "timesteps"], as_index=False)["mean_return"].mean()


def curve_frame(runs: list[str | Path]) -> pd.DataFrame:
    series = []
    for i, run in enumerate(runs):
        s = run_series(load_metrics(metrics_path(run)))
        s["run"] = i
        series.append(s)
    merged = pd.concat(series, ignore_index=True)

    out = (
        merged.groupby(["label", "timesteps"])["mean_return"]
        .agg(mean_return="mean", std=lambda x: x.std(ddof=1), seeds="count")
        .reset_index()
    )
    out["stderr"] = (out["std"] / np.sqrt(out["seeds"])).fillna(0.0)
    return out[CURVE_COLUMNS].sort_values(["label", "timesteps"]).reset_index(drop=True)


def cmd_export(args: argparse.Namespace) -> None:
    frame = curve_frame(args.runs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    logger.info(
        f"Curves exported | out={out} runs={len(args.runs)} "
        f"labels={frame['label'].nunique()} rows={len(frame)}"
    )
