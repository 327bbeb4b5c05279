# =============================================================
# src/rl/gae.py
#
# Generalised Advantage Estimation, single backward pass:
#
#   next_t = bootstrap_values[t]   if dones[t]
#            values[t+1]           otherwise (t < n-1)
#            bootstrap_value       otherwise (t = n-1)
#   δ_t = r_t + γ·next_t − V_t
#   A_t = δ_t + γλ(1 − done_t)·A_{t+1}
#   R_t = A_t + V_t
#
# With all bootstrap_values zero this is exactly the textbook
# recursion δ_t = r_t + γ(1−done_t)V_{t+1} − V_t.
# =============================================================

from dataclasses import replace

import numpy as np

from src.rl.batch import RolloutBatch

ADV_STD_FLOOR = 1e-8


def compute_gae(batch: RolloutBatch, gamma: float, lam: float,
                bootstrap_value: float = 0.0) -> RolloutBatch:
    n       = len(batch)
    rewards = np.asarray(batch.rewards, dtype=np.float64)
    values  = np.asarray(batch.values, dtype=np.float64)
    dones   = np.asarray(batch.dones, dtype=bool)
    boots   = batch.boots()

    advantages = np.zeros(n, dtype=np.float64)
    running    = 0.0
    for t in range(n - 1, -1, -1):
        if dones[t]:
            next_value = boots[t]
            running    = 0.0
        else:
            next_value = values[t + 1] if t + 1 < n else bootstrap_value
        delta   = rewards[t] + gamma * next_value - values[t]
        running = delta + gamma * lam * running
        advantages[t] = running

    return replace(batch, advantages=advantages, returns=advantages + values)


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """Zero mean, unit std over the WHOLE batch (std floored at 1e-8)."""
    if advantages.shape[0] == 0:
        return advantages
    std = max(float(np.std(advantages)), ADV_STD_FLOOR)
    return (advantages - np.mean(advantages)) / std
