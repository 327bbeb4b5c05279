# =============================================================
# src/schemas/experiment.py
#
# The experiment config: every scalar of the training
# procedure in one pydantic model, so a run is fully described
# by a single JSON file that can be snapshot and replayed.
#
# Think of it as a contract:
# if a value breaks an invariant (U=0, γ>1, D<N...) the config
# is rejected before any training code runs. You never write
# "if cfg.U < 1" checks deeper in the engine.
#
# PRESETS:
#   bandits            → 2D moving bandits  (K=2, N=10, T=50,  W=9,  U=1)
#   fourrooms          → four rooms         (K=4, N=25, T=100, W=20, U=30)
#   obstacle-transfer  → wide four rooms meta-training,
#                        adaptation on the sparse obstacle maze
#   Learning rates: θ 0.01, φ 0.0003. D=2000, 10 groups.
#   PPO: 10 epochs, minibatch 64, one barrier step per minibatch.
# =============================================================

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.errors import ConfigError


# ── PPO ────────────────────────────────────────────────────────────────────────
# Defaults are the canonical PPO settings. Only the learning
# rates are fixed by the method itself; everything else is a
# tuning knob and lives here so it can be overridden per level.

class PpoConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    clip:           float = Field(0.2,  gt=0)
    gamma:          float = Field(0.99, gt=0, le=1)
    lam:            float = Field(0.95, ge=0, le=1)
    epochs:         int   = Field(4,    ge=1)
    minibatch_size: int   = Field(256,  ge=1)
    vf_coef:        float = Field(0.5,  ge=0)
    ent_coef:       float = Field(0.01, ge=0)
    lr:             float = Field(3e-4, gt=0)
    max_grad_norm:  float = Field(0.5,  gt=0)
    # distributed only: what one barrier step covers
    sync:           Literal["minibatch", "epoch"] = "minibatch"


# ── MLSH ───────────────────────────────────────────────────────────────────────

class MlshConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label:           str = "mlsh"
    env:             str = "bandits"
    transfer_env:    Optional[str] = None

    # hierarchy shape
    K:      int = Field(2,  ge=1, description="number of sub-policies")
    N:      int = Field(10, ge=1, description="master action duration in primitive steps")
    T:      int = Field(50, ge=1, description="episode length")
    W:      int = Field(9,  ge=0, description="warmup iterations per task")
    U:      int = Field(1,  ge=1, description="joint iterations per task")
    D:      int = Field(2000, ge=1, description="timesteps per collection per worker")
    hidden: int = Field(64, ge=1)

    master_ppo:   PpoConfig = Field(default_factory=lambda: PpoConfig(lr=0.01))
    sub_ppo:      PpoConfig = Field(default_factory=lambda: PpoConfig(lr=3e-4))
    baseline_ppo: PpoConfig = Field(default_factory=lambda: PpoConfig(lr=3e-4))

    # topology + budget
    meta_iterations:   int = Field(300, ge=0)
    groups:            int = Field(10, ge=1)
    workers_per_group: int = Field(1, ge=1)
    seed:              int = Field(0, ge=0)
    checkpoint_every:  int = Field(50, ge=1)
    plateau_patience:  Optional[int] = Field(None, ge=1)

    # test-time adaptation / baselines
    eval_tasks:   int = Field(20, ge=1)
    adapt_budget: int = Field(10, ge=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> "MlshConfig":
        if self.D < self.N:
            raise ValueError(f"D ({self.D}) must be at least N ({self.N})")
        from src.envs.registry import horizon_for, known_envs
        for name in (self.env, self.transfer_env):
            if name is not None and name not in known_envs():
                raise ValueError(f"unknown env '{name}' (known: {', '.join(known_envs())})")
        if horizon_for(self.env) != self.T:
            raise ValueError(
                f"T={self.T} does not match the episode length of env '{self.env}' "
                f"({horizon_for(self.env)})"
            )
        return self

    @property
    def total_workers(self) -> int:
        return self.groups * self.workers_per_group


# ── PRESETS ────────────────────────────────────────────────────────────────────

# every preset: 10 epochs of 64-row minibatches, one barrier step each
_UPDATE: dict[str, Any] = {"epochs": 10, "minibatch_size": 64, "sync": "minibatch"}

PRESETS: dict[str, dict[str, Any]] = {
    "bandits": {
        "label": "bandits", "env": "bandits",
        "K": 2, "N": 10, "T": 50, "W": 9, "U": 1, "D": 2000,
        "groups": 10, "meta_iterations": 300,
        "master_ppo": {"lr": 0.01, **_UPDATE}, "sub_ppo": {"lr": 0.0003, **_UPDATE},
        "baseline_ppo": {"lr": 0.0003, **_UPDATE},
    },
    "fourrooms": {
        "label": "fourrooms", "env": "fourrooms",
        "K": 4, "N": 25, "T": 100, "W": 20, "U": 30, "D": 2000,
        "groups": 10, "meta_iterations": 500, "eval_tasks": 10, "adapt_budget": 30,
        "master_ppo": {"lr": 0.01, **_UPDATE}, "sub_ppo": {"lr": 0.0003, **_UPDATE},
        "baseline_ppo": {"lr": 0.0003, **_UPDATE},
    },
    "obstacle-transfer": {
        "label": "obstacle-transfer", "env": "fourrooms-wide", "transfer_env": "obstacle",
        "K": 4, "N": 25, "T": 200, "W": 20, "U": 30, "D": 2000,
        "groups": 10, "meta_iterations": 500, "eval_tasks": 3, "adapt_budget": 50,
        "master_ppo": {"lr": 0.01, **_UPDATE}, "sub_ppo": {"lr": 0.0003, **_UPDATE},
        "baseline_ppo": {"lr": 0.0003, **_UPDATE},
    },
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def load_preset(name: str) -> dict[str, Any]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}' (known: {', '.join(preset_names())})")
    return copy.deepcopy(PRESETS[name])


def load_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e


# ── OVERRIDES ──────────────────────────────────────────────────────────────────
# --set W=0  --set master_ppo.lr=0.02  --set label="no-warmup"
# Values are parsed as JSON literals first (numbers, bools,
# null); anything that isn't valid JSON is kept as a string.

def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, value = item.split("=", 1)
        path = [p for p in key.strip().split(".") if p]
        if not path:
            raise ConfigError(f"override '{item}' has an empty key")
        node = out
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"override '{item}': '{part}' is not a section")
            node = child
        node[path[-1]] = _parse_value(value.strip())
    return out


def build_config(
    preset:    Optional[str] = None,
    path:      Optional[str | Path] = None,
    overrides: Optional[list[str]] = None,
    seed:      Optional[int] = None,
) -> MlshConfig:
    """Preset or file → overrides → seed → validated MlshConfig."""
    if preset and path:
        raise ConfigError("pass either a preset or a config file, not both")
    raw = load_config_file(path) if path else load_preset(preset or "bandits")
    raw = apply_overrides(raw, overrides or [])
    # ablations share a preset's label otherwise, and curve
    # export groups runs by label
    tagged = [o for o in (overrides or []) if not o.strip().startswith("label=")]
    if tagged and not any(o.strip().startswith("label=") for o in overrides or []):
        raw["label"] = f"{raw.get('label', 'mlsh')}[{','.join(o.strip() for o in tagged)}]"
    if seed is not None:
        raw["seed"] = seed
    try:
        return MlshConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config:\n{e}") from e
