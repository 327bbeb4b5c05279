# =============================================================
# src/engine/metrics.py
#
# JSONL writers for the metrics and timing streams.
#
# metrics.jsonl must come out byte-identical when a run is
# repeated with the same config and seed, so it only ever
# receives MetricRecord lines. Wall-clock goes to
# timings.jsonl.
# =============================================================

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

from src.engine.group import GroupReport
from src.schemas.records import MetricRecord, RunKind, TimingRecord

METRICS_FILE = "metrics.jsonl"
TIMINGS_FILE = "timings.jsonl"


def _finite(x: Optional[float]) -> Optional[float]:
    return None if x is None or not math.isfinite(x) else float(x)


def to_record(report: GroupReport, *, label: str, kind: RunKind, seed: int, iteration: int,
              timesteps: int, phase: Optional[str] = None) -> MetricRecord:
    return MetricRecord(
        label=label, kind=kind, seed=seed, iteration=iteration, group=report.group_id,
        task_seed=report.task_seed, phase=phase or report.phase, timesteps=timesteps,
        mean_return=report.mean_return, mean_macro_reward=report.mean_macro_reward,
        episodes=report.episodes,
        master_loss=_finite(report.master_loss), master_entropy=_finite(report.master_entropy),
        sub_loss=_finite(report.sub_loss), sub_entropy=_finite(report.sub_entropy),
    )


class JsonlWriter:
    """Append-only JSONL file. No-op when path is None (in-memory runs)."""

    def __init__(self, path: Optional[Path]):
        self.path = path
        self._fh  = None
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = path.open("w", encoding="utf-8")

    def write(self, record) -> None:
        if self._fh is not None:
            self._fh.write(record.model_dump_json() + "\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_records(path: Path, records: list[MetricRecord]) -> Path:
    with JsonlWriter(path) as w:
        for rec in records:
            w.write(rec)
    return path


def timing(iteration: int, seconds: float) -> TimingRecord:
    return TimingRecord(iteration=iteration, seconds=round(seconds, 6))
