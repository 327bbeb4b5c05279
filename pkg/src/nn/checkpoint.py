# =============================================================
# src/nn/checkpoint.py
#
# Binary checkpoint for φ (and optionally one θ).
#
# FILE LAYOUT:
#   8 bytes   magic  b"MLSHCKPT"
#   4 bytes   uint32 LE format version
#   4 bytes   uint32 LE header length H
#   H bytes   UTF-8 JSON  (CheckpointHeader)
#   K·P × 8   float64 LE  sub-policy parameters, φ_1 … φ_K
#   M × 8     float64 LE  master parameters (only if has_master)
#
# Writes go to a temp file that is renamed into place; a
# reader never sees a half-written checkpoint.
# =============================================================

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import ValidationError

from src.core.errors import ConfigError
from src.nn.network import NetParams
from src.schemas.records import CHECKPOINT_VERSION, CheckpointHeader

MAGIC = b"MLSHCKPT"
_LE_F64 = np.dtype("<f8")


@dataclass(frozen=True)
class Checkpoint:
    header: CheckpointHeader
    subs:   tuple[NetParams, ...]
    master: Optional[NetParams] = None


def save_checkpoint(
    path:           str | Path,
    env:            str,
    subs:           Sequence[NetParams],
    master:         Optional[NetParams] = None,
    meta_iteration: int = 0,
) -> Path:
    path  = Path(path)
    first = subs[0]
    if any(s.size != first.size or s.input_dim != first.input_dim for s in subs):
        raise ConfigError("all sub-policies in a checkpoint must share one shape")

    header = CheckpointHeader(
        env                = env,
        K                  = len(subs),
        input_dim          = first.input_dim,
        n_actions          = first.n_actions,
        hidden             = first.hidden,
        param_count        = first.size,
        has_master         = master is not None,
        master_param_count = master.size if master is not None else 0,
        meta_iteration     = meta_iteration,
    )
    header_bytes = header.model_dump_json().encode("utf-8")

    body = [np.asarray(s.flat, dtype=_LE_F64).tobytes() for s in subs]
    if master is not None:
        body.append(np.asarray(master.flat, dtype=_LE_F64).tobytes())

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for chunk in body:
            fh.write(chunk)
    os.replace(tmp, path)

    logger.info(
        f"Checkpoint written: {path} | K={header.K} in={header.input_dim} "
        f"A={header.n_actions} iteration={meta_iteration}"
    )
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"checkpoint not found: {path}")
    data = path.read_bytes()

    if data[:8] != MAGIC:
        raise ConfigError(f"{path}: not a checkpoint file (bad magic)")
    version, header_len = struct.unpack("<II", data[8:16])
    if version != CHECKPOINT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {version}")

    try:
        header = CheckpointHeader.model_validate_json(data[16:16 + header_len])
    except ValidationError as e:
        raise ConfigError(f"{path}: corrupt checkpoint header ({e})") from e

    values   = np.frombuffer(data[16 + header_len:], dtype=_LE_F64).astype(np.float64)
    expected = header.K * header.param_count + header.master_param_count
    if values.shape[0] != expected:
        raise ConfigError(
            f"{path}: expected {expected} parameters, found {values.shape[0]}"
        )

    P    = header.param_count
    subs = tuple(
        NetParams(header.input_dim, header.n_actions, header.hidden, values[k * P:(k + 1) * P].copy())
        for k in range(header.K)
    )
    master = None
    if header.has_master:
        master = NetParams(
            header.input_dim, header.K, header.hidden, values[header.K * P:].copy()
        )
    return Checkpoint(header=header, subs=subs, master=master)
