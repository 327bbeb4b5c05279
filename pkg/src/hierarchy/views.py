# =============================================================
# src/hierarchy/views.py
#
# One rollout, two training batches.
#
#   master_view   one row per master decision. The ≤N primitive
#                 steps under a decision collapse into a single
#                 transition: action = k, reward = their sum.
#   sub_view      primitive steps routed to the sub-policy that
#                 was active. Where k changes the row is marked
#                 done so advantages never leak into another
#                 sub-policy's steps; the cut bootstraps from
#                 the sub-policy's own value of the next state.
#
# Nothing here copies more than it has to: both views are
# fancy-indexed slices of the trajectory arrays.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.core.errors import ContractViolation
from src.hierarchy.agent import Trajectory
from src.rl.batch import RolloutBatch


@dataclass(frozen=True, eq=False)
class MacroTransition:
    obs:      np.ndarray = field(repr=False)
    k:        int
    reward:   float
    done:     bool
    logprob:  float
    value:    float
    length:   int


def _segment_bounds(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    starts = traj.decision_index
    ends   = np.append(starts[1:], len(traj))
    return starts, ends


def macro_transitions(traj: Trajectory, N: Optional[int] = None) -> list[MacroTransition]:
    starts, ends = _segment_bounds(traj)
    limit = N if N is not None else traj.N
    out = []
    for s, e in zip(starts, ends):
        if e - s > limit:
            raise ContractViolation(f"macro segment [{s}, {e}) is longer than N={limit}")
        out.append(MacroTransition(
            obs=traj.obs[s], k=int(traj.ks[s]),
            reward=float(np.sum(traj.rewards[s:e])), done=bool(traj.dones[e - 1]),
            logprob=float(traj.master_logprobs[len(out)]),
            value=float(traj.master_values[len(out)]),
            length=int(e - s),
        ))
    return out


def master_view(traj: Trajectory, N: Optional[int] = None) -> RolloutBatch:
    """
    Macro batch. A segment that ran into the end of the rollout
    is not done; pass traj.master_bootstrap to compute_gae for it.
    """
    macros = macro_transitions(traj, N)
    if not macros:
        return RolloutBatch.empty(traj.obs.shape[1])
    return RolloutBatch(
        obs=np.stack([m.obs for m in macros]),
        actions=np.array([m.k for m in macros], dtype=np.int64),
        logprobs=np.array([m.logprob for m in macros]),
        rewards=np.array([m.reward for m in macros]),
        values=np.array([m.value for m in macros]),
        dones=np.array([m.done for m in macros], dtype=bool),
    )


def sub_view(traj: Trajectory) -> dict[int, RolloutBatch]:
    """k → batch of the primitive steps φ_k took, in time order. Every k is present."""
    cut   = traj.run_ends()
    views = {}
    for k in range(traj.K):
        rows = np.nonzero(traj.ks == k)[0]
        if rows.size == 0:
            views[k] = RolloutBatch.empty(traj.obs.shape[1])
            continue
        views[k] = RolloutBatch(
            obs=traj.obs[rows], actions=traj.actions[rows],
            logprobs=traj.sub_logprobs[rows], rewards=traj.rewards[rows],
            values=traj.sub_values[rows], dones=cut[rows],
            bootstrap_values=traj.sub_boot[rows],
        )
    return views
