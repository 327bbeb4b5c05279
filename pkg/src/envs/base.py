# =============================================================
# src/envs/base.py
#
# The environment contract every task distribution satisfies.
#
#   EnvSpec   → shapes shared by ALL tasks of a distribution
#               (obs dim, action count, episode length T)
#   TaskSeed  → one sampled MDP. The same seed always builds
#               the same MDP, hidden flags included.
#   Environment.reset() / .step(a) → the usual loop.
#
# EPISODE END:
# done is forced at exactly T steps if nothing ended the
# episode earlier. A time-limit end is treated as terminal
# (finite-horizon tasks), so no bootstrap happens across it.
# =============================================================

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import ContractViolation


class EnvSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:      str
    obs_dim:   int = Field(..., gt=0)
    n_actions: int = Field(..., gt=0)
    horizon:   int = Field(..., gt=0)


@dataclass(frozen=True)
class TaskSeed:
    dist: str
    seed: int

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class Environment(ABC):
    """One MDP instance. Owned by exactly one worker."""

    def __init__(self, spec: EnvSpec, task: TaskSeed):
        self.spec = spec
        self.task = task
        self.t    = 0

    @abstractmethod
    def _reset(self) -> np.ndarray: ...

    @abstractmethod
    def _step(self, action: int) -> tuple[np.ndarray, float, bool]: ...

    def reset(self) -> np.ndarray:
        self.t = 0
        return self._reset()

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if not 0 <= int(action) < self.spec.n_actions:
            raise ContractViolation(
                f"action {action} outside [0, {self.spec.n_actions}) for {self.spec.name}"
            )
        obs, reward, done = self._step(int(action))
        self.t += 1
        if self.t >= self.spec.horizon:
            done = True
        return obs, reward, done
