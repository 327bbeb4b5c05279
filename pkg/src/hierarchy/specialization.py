# =============================================================
# src/hierarchy/specialization.py
#
# What did each sub-policy learn to do?
#
# BANDITS:
#   200 probe states, each a random agent position plus two
#   random goals. For sub-policy k and probe s, take the greedy
#   action and check which goals it moves STRICTLY closer to.
#     goal approach  per goal slot, the fraction of probes it
#                    moves closer to that goal
#     majority goal  the goal slot (0 or 1) it approaches most
#     score          fraction of probes where it approaches
#                    its majority goal
#   Run score = mean over sub-policies. `distinct` is True when
#   the sub-policies do not all head for the same slot.
#
# GRIDS:
#   no goal slots to compare against, so the report is just a
#   histogram of greedy actions over every free cell.
#
# ARROWS: greedy move of every sub-policy on a regular grid of
# agent positions for one fixed probe task, as (x, y, dx, dy)
# rows for a quiver plot.
# =============================================================

from __future__ import annotations

import numpy as np

from src.envs import bandits
from src.envs.base import TaskSeed
from src.envs.gridworld import MOVES as GRID_MOVES
from src.envs.gridworld import GridWorld
from src.envs.registry import make_env
from src.hierarchy.policies import SubPolicySet
from src.nn.network import forward
from src.schemas.records import SpecializationReport, SubPolicyProfile

PROBES = 200
ARROW_STEPS = 11
_CLOSER_EPS = 1e-12


def greedy_actions(subs: SubPolicySet, k: int, obs: np.ndarray) -> np.ndarray:
    logits, _ = forward(subs.nets[k], np.atleast_2d(obs))
    return np.argmax(logits, axis=1)


# ── BANDITS ────────────────────────────────────────────────────────────────────

def bandit_probes(rng: np.random.Generator, n: int = PROBES) -> np.ndarray:
    pos   = rng.uniform(0.0, 1.0, size=(n, 2))
    goals = rng.uniform(bandits.GOAL_LOW, bandits.GOAL_HIGH, size=(n, 4))
    return np.concatenate([pos, goals], axis=1)


def approach_counts(probes: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """(n, 2) bool: does the action move strictly closer to goal 0 / goal 1?"""
    pos  = probes[:, :2]
    new  = np.clip(pos + bandits.MOVES[actions], 0.0, 1.0)
    out  = np.zeros((len(probes), 2), dtype=bool)
    for j in range(2):
        goal = probes[:, 2 + 2 * j: 4 + 2 * j]
        out[:, j] = (np.linalg.norm(new - goal, axis=1)
                     < np.linalg.norm(pos - goal, axis=1) - _CLOSER_EPS)
    return out


def bandit_report(subs: SubPolicySet, rng: np.random.Generator, n: int = PROBES) -> SpecializationReport:
    probes   = bandit_probes(rng, n)
    profiles = []
    for k in range(subs.K):
        actions = greedy_actions(subs, k, probes)
        closer  = approach_counts(probes, actions).sum(axis=0)
        majority = int(np.argmax(closer))
        profiles.append(SubPolicyProfile(
            sub_policy=k,
            greedy_histogram=np.bincount(actions, minlength=subs.n_actions).tolist(),
            majority_goal=majority,
            score=float(closer[majority] / n),
            goal_approach=[float(c / n) for c in closer],
        ))
    majorities = {p.majority_goal for p in profiles}
    return SpecializationReport(
        env="bandits", K=subs.K, probes=n, sub_policies=profiles,
        score=float(np.mean([p.score for p in profiles])),
        distinct=subs.K > 1 and len(majorities) > 1,
    )


def bandit_arrows(subs: SubPolicySet, task: TaskSeed) -> list[dict]:
    goals, _ = bandits.task_layout(task)
    axis = np.linspace(0.0, 1.0, ARROW_STEPS)
    xy   = np.array([(x, y) for y in axis for x in axis])
    obs  = np.concatenate([xy, np.tile(goals.ravel(), (len(xy), 1))], axis=1)
    rows = []
    for k in range(subs.K):
        for (x, y), a in zip(xy, greedy_actions(subs, k, obs)):
            dx, dy = bandits.MOVES[a]
            rows.append({"sub_policy": k, "x": float(x), "y": float(y), "action": int(a),
                         "dx": float(dx), "dy": float(dy)})
    return rows


# ── GRIDS ──────────────────────────────────────────────────────────────────────

def _grid_states(env: GridWorld) -> tuple[list[tuple[int, int]], np.ndarray]:
    cells = env.layout.free_cells()
    return cells, np.stack([env.observe_at(cell) for cell in cells])


def grid_report(subs: SubPolicySet, task: TaskSeed) -> SpecializationReport:
    env = make_env(task)
    cells, obs = _grid_states(env)
    profiles = [
        SubPolicyProfile(
            sub_policy=k,
            greedy_histogram=np.bincount(greedy_actions(subs, k, obs), minlength=subs.n_actions).tolist(),
        )
        for k in range(subs.K)
    ]
    return SpecializationReport(env=task.dist, K=subs.K, probes=len(cells), sub_policies=profiles)


def grid_arrows(subs: SubPolicySet, task: TaskSeed) -> list[dict]:
    env = make_env(task)
    cells, obs = _grid_states(env)
    rows = []
    for k in range(subs.K):
        for (r, c), a in zip(cells, greedy_actions(subs, k, obs)):
            dr, dc = GRID_MOVES[a]
            rows.append({"sub_policy": k, "x": c, "y": r, "action": int(a), "dx": dc, "dy": dr})
    return rows
