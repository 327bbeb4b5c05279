# =============================================================
# src/envs/bandits.py
#
# 2D moving bandits.
#
# The agent lives in the unit square and sees its own
# position plus two candidate goals. Only one goal is the
# real one and the observation never says which:
#
#   obs = [agent_x, agent_y, g1_x, g1_y, g2_x, g2_y]
#
# Reward is 1 on every step the agent ends within 0.1 of the
# correct goal, 0 otherwise. Episodes last 50 steps.
#
# CONSTANTS:
#   start      (0.5, 0.5)
#   step size  0.05 per move, clamped to [0,1]²
#   threshold  0.1  (Euclidean)
#   goals      uniform in [0.1, 0.9]²
#   actions    0 up, 1 down, 2 left, 3 right, 4 stay
# =============================================================

import numpy as np

from src.envs.base import EnvSpec, Environment, TaskSeed

STEP       = 0.05
THRESHOLD  = 0.1
GOAL_LOW   = 0.1
GOAL_HIGH  = 0.9
START      = (0.5, 0.5)
HORIZON    = 50

# tolerance on the threshold test so 0.5 + 6·0.05 counts as
# exactly 0.1 away from 0.9 despite float rounding
_EPS = 1e-9

MOVES = np.array([
    [0.0,  STEP],    # up
    [0.0, -STEP],    # down
    [-STEP, 0.0],    # left
    [STEP,  0.0],    # right
    [0.0,  0.0],     # stay
])

SPEC = EnvSpec(name="bandits", obs_dim=6, n_actions=5, horizon=HORIZON)


def task_layout(task: TaskSeed) -> tuple[np.ndarray, int]:
    """(goals (2,2), index of the correct goal), a pure function of the seed."""
    rng   = task.rng()
    goals = rng.uniform(GOAL_LOW, GOAL_HIGH, size=(2, 2))
    correct = int(rng.integers(2))
    return goals, correct


class MovingBandits2D(Environment):

    def __init__(self, task: TaskSeed, horizon: int = HORIZON, correct: int | None = None):
        super().__init__(SPEC.model_copy(update={"horizon": horizon}), task)
        self.goals, self.correct = task_layout(task)
        if correct is not None:
            self.correct = int(correct)
        self.pos = np.array(START, dtype=np.float64)

    def _obs(self) -> np.ndarray:
        return np.concatenate([self.pos, self.goals[0], self.goals[1]])

    def _reset(self) -> np.ndarray:
        self.pos = np.array(START, dtype=np.float64)
        return self._obs()

    def _step(self, action: int) -> tuple[np.ndarray, float, bool]:
        self.pos = np.clip(self.pos + MOVES[action], 0.0, 1.0)
        dist     = float(np.linalg.norm(self.pos - self.goals[self.correct]))
        reward   = 1.0 if dist <= THRESHOLD + _EPS else 0.0
        return self._obs(), reward, False
