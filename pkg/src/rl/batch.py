# =============================================================
# src/rl/batch.py
#
# RolloutBatch: the one experience format PPO understands.
#
# Both views of a hierarchical rollout are converted into
# this shape before training:
#   master view → one row per master decision, action = k
#   sub view    → one row per primitive step of sub-policy k
# so PPO never needs to know which level it is training.
#
# DONES AND BOOTSTRAPS:
#   dones[t]            stops the advantage recursion at t
#   bootstrap_values[t] the value used for V(s_{t+1}) when
#                       dones[t] is set. 0 for a real episode
#                       end; a value estimate when the cut is
#                       only a truncation (sub-policy switch).
#   Rows where dones[t] is False use values[t+1] (or the
#   final bootstrap passed to compute_gae for the last row).
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from src.core.errors import ContractViolation


@dataclass(frozen=True, eq=False)
class RolloutBatch:
    obs:              np.ndarray = field(repr=False)   # (n, obs_dim)
    actions:          np.ndarray = field(repr=False)   # (n,) int
    logprobs:         np.ndarray = field(repr=False)   # (n,) old log π(a|s)
    rewards:          np.ndarray = field(repr=False)   # (n,)
    values:           np.ndarray = field(repr=False)   # (n,) old V(s)
    dones:            np.ndarray = field(repr=False)   # (n,) bool
    bootstrap_values: Optional[np.ndarray] = field(default=None, repr=False)

    # filled in by compute_gae
    advantages:       Optional[np.ndarray] = field(default=None, repr=False)
    returns:          Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.actions)
        columns = {
            "obs": self.obs, "logprobs": self.logprobs, "rewards": self.rewards,
            "values": self.values, "dones": self.dones,
        }
        if self.bootstrap_values is not None:
            columns["bootstrap_values"] = self.bootstrap_values
        if self.advantages is not None:
            columns["advantages"] = self.advantages
        if self.returns is not None:
            columns["returns"] = self.returns
        for name, column in columns.items():
            if len(column) != n:
                raise ContractViolation(
                    f"RolloutBatch column '{name}' has length {len(column)}, expected {n}"
                )
        if self.advantages is not None and not np.all(np.isfinite(self.advantages)):
            raise ContractViolation("RolloutBatch advantages contain non-finite values")

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def finalized(self) -> bool:
        return self.advantages is not None and self.returns is not None

    def boots(self) -> np.ndarray:
        if self.bootstrap_values is None:
            return np.zeros(len(self), dtype=np.float64)
        return self.bootstrap_values

    def select(self, idx: np.ndarray) -> "RolloutBatch":
        """Row subset (minibatch). Keeps computed columns."""
        pick = lambda a: None if a is None else a[idx]
        return replace(
            self,
            obs=self.obs[idx], actions=self.actions[idx], logprobs=self.logprobs[idx],
            rewards=self.rewards[idx], values=self.values[idx], dones=self.dones[idx],
            bootstrap_values=pick(self.bootstrap_values),
            advantages=pick(self.advantages), returns=pick(self.returns),
        )

    @classmethod
    def concat(cls, batches: list["RolloutBatch"]) -> "RolloutBatch":
        """Stack finalized batches row-wise (GAE already done per batch)."""
        if not batches:
            raise ContractViolation("nothing to concatenate")
        if not all(b.finalized for b in batches):
            raise ContractViolation("only finalized batches can be concatenated")
        cat = lambda name: np.concatenate([getattr(b, name) for b in batches])
        return cls(
            obs=cat("obs"), actions=cat("actions"), logprobs=cat("logprobs"),
            rewards=cat("rewards"), values=cat("values"), dones=cat("dones"),
            bootstrap_values=np.concatenate([b.boots() for b in batches]),
            advantages=cat("advantages"), returns=cat("returns"),
        )

    @classmethod
    def empty(cls, obs_dim: int) -> "RolloutBatch":
        return cls(
            obs=np.zeros((0, obs_dim)), actions=np.zeros(0, dtype=np.int64),
            logprobs=np.zeros(0), rewards=np.zeros(0), values=np.zeros(0),
            dones=np.zeros(0, dtype=bool),
        )
