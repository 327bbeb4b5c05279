# =============================================================
# src/schemas/records.py
#
# Pydantic models for everything written to disk as JSON:
#   CheckpointHeader → the JSON block inside a .ckpt file
#   MetricRecord     → one line of metrics.jsonl
#   TimingRecord     → one line of timings.jsonl
#   StepRecord       → one line of trajectories.jsonl
#   SpecializationReport → specialization.json (cmd_inspect)
#
# Readers validate through these same models, so a file from
# another schema version fails loudly instead of being
# half-parsed (cmd_export relies on this).
# =============================================================

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

CHECKPOINT_VERSION = 1


class CheckpointHeader(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version:            int = CHECKPOINT_VERSION
    env:                str
    K:                  int = Field(..., ge=1)
    input_dim:          int = Field(..., ge=1)
    n_actions:          int = Field(..., ge=1)
    hidden:             int = Field(..., ge=1)
    param_count:        int = Field(..., ge=1)
    has_master:         bool = False
    master_param_count: int = 0
    meta_iteration:     int = 0


RunKind = Literal["mlsh", "shared", "scratch", "finetune", "adapt"]
Phase   = Literal["warmup", "joint", "adapt", "flat"]


class MetricRecord(BaseModel):
    """
    One (iteration, group) row. For adaptation / scratch /
    finetune curves `group` is the index of the held-out task.
    No wall-clock fields: reruns must produce identical bytes.
    """
    model_config = ConfigDict(extra="forbid")

    label:             str
    kind:              RunKind
    seed:              int
    iteration:         int
    group:             int
    task_seed:         int
    phase:             Phase
    timesteps:         int
    mean_return:       float
    mean_macro_reward: float
    episodes:          int
    master_loss:       Optional[float] = None
    master_entropy:    Optional[float] = None
    sub_loss:          Optional[float] = None
    sub_entropy:       Optional[float] = None


class TimingRecord(BaseModel):
    iteration: int
    seconds:   float


class StepRecord(BaseModel):
    iteration: int
    group:     int
    worker:    int
    t:         int
    obs:       list[float]
    action:    int
    reward:    float
    done:      bool
    k:         int


class SubPolicyProfile(BaseModel):
    sub_policy:       int
    greedy_histogram: list[int]
    majority_goal:    Optional[int] = None
    score:            Optional[float] = None
    # bandits: fraction of probes where the greedy action moves closer to goal 0 / goal 1
    goal_approach:    Optional[list[float]] = None


class SpecializationReport(BaseModel):
    """specialization.json: what each sub-policy does on a fixed set of probe states."""
    env:          str
    K:            int
    probes:       int
    sub_policies: list[SubPolicyProfile]
    score:        Optional[float] = None
    distinct:     Optional[bool] = None
