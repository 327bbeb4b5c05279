# =============================================================
# src/envs/gridworld.py
#
# Deterministic gridworlds: four rooms (13×13), a wide four
# rooms on a 25×25 canvas, and the sparse obstacle maze used
# only as a transfer target.
#
# DYNAMICS:
#   actions 0 up, 1 down, 2 left, 3 right
#   moving into a wall leaves the agent where it is
#   reaching the goal gives reward 1 and ends the episode
#   every other step gives 0
#
# OBSERVATION:
#   one-hot(agent cell) ++ one-hot(goal cell), each of size
#   rows·cols: 338 for 13×13, 1250 for 25×25. Tabular-style
#   inputs keep a 2-layer MLP expressive enough for grids.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.envs.base import EnvSpec, Environment, TaskSeed

MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


# ── LAYOUTS ────────────────────────────────────────────────────────────────────
# 'w' = wall, ' ' = free. The classic four-rooms map from the
# options literature, reproduced cell for cell.

FOUR_ROOMS_MAP = (
    "wwwwwwwwwwwww",
    "w     w     w",
    "w     w     w",
    "w           w",
    "w     w     w",
    "w     w     w",
    "ww wwww     w",
    "w     www www",
    "w     w     w",
    "w     w     w",
    "w           w",
    "w     w     w",
    "wwwwwwwwwwwww",
)


@dataclass(frozen=True, eq=False)
class Layout:
    name:  str
    walls: np.ndarray           # (rows, cols) bool
    start: tuple[int, int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.walls.shape

    def free_cells(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(~self.walls)
        return [(int(r), int(c)) for r, c in zip(rows, cols)]


def _from_map(name: str, rows: tuple[str, ...], start: tuple[int, int]) -> Layout:
    walls = np.array([[ch == "w" for ch in row] for row in rows], dtype=bool)
    return Layout(name, walls, start)


def _bordered(size: int) -> np.ndarray:
    walls = np.zeros((size, size), dtype=bool)
    walls[0, :] = walls[-1, :] = True
    walls[:, 0] = walls[:, -1] = True
    return walls


@lru_cache(maxsize=None)
def four_rooms() -> Layout:
    return _from_map("fourrooms", FOUR_ROOMS_MAP, start=(1, 1))


@lru_cache(maxsize=None)
def four_rooms_wide() -> Layout:
    # same topology as the classic map on a 25×25 canvas:
    # vertical wall with two doors, offset horizontal walls
    # with one door each
    walls = _bordered(25)
    walls[:, 12]     = True
    walls[6, 12]     = walls[18, 12] = False
    walls[12, 1:12]  = True
    walls[12, 5]     = False
    walls[14, 13:24] = True
    walls[14, 18]    = False
    return Layout("fourrooms-wide", walls, start=(1, 1))


@lru_cache(maxsize=None)
def obstacle_course() -> Layout:
    # three full-width walls with gaps on alternating sides:
    # the goal is only reachable by chaining right, down and
    # left movements across four corridors
    walls = _bordered(25)
    for row, gap in ((6, 23), (12, 1), (18, 23)):
        walls[row, 1:24] = True
        walls[row, gap]  = False
    return Layout("obstacle", walls, start=(1, 1))


OBSTACLE_GOAL = (23, 1)


# ── ENVIRONMENT ────────────────────────────────────────────────────────────────

class GridWorld(Environment):

    def __init__(self, layout: Layout, task: TaskSeed, goal: tuple[int, int], horizon: int):
        rows, cols = layout.shape
        spec = EnvSpec(name=layout.name, obs_dim=2 * rows * cols, n_actions=4, horizon=horizon)
        super().__init__(spec, task)
        self.layout = layout
        self.goal   = goal
        self.agent  = layout.start

    def _index(self, cell: tuple[int, int]) -> int:
        return cell[0] * self.layout.shape[1] + cell[1]

    def observe_at(self, cell: tuple[int, int]) -> np.ndarray:
        """Observation with the agent at `cell`. Does not move the agent."""
        n   = self.layout.walls.size
        obs = np.zeros(2 * n, dtype=np.float64)
        obs[self._index(cell)]           = 1.0
        obs[n + self._index(self.goal)]  = 1.0
        return obs

    def _obs(self) -> np.ndarray:
        return self.observe_at(self.agent)

    def _reset(self) -> np.ndarray:
        self.agent = self.layout.start
        return self._obs()

    def _step(self, action: int) -> tuple[np.ndarray, float, bool]:
        dr, dc = MOVES[action]
        nxt = (self.agent[0] + dr, self.agent[1] + dc)
        if not self.layout.walls[nxt]:
            self.agent = nxt
        if self.agent == self.goal:
            return self._obs(), 1.0, True
        return self._obs(), 0.0, False


def goal_candidates(layout: Layout) -> list[tuple[int, int]]:
    return [cell for cell in layout.free_cells() if cell != layout.start]


def bfs_distances(layout: Layout, origin: tuple[int, int]) -> dict[tuple[int, int], int]:
    """Shortest move counts from origin to every reachable free cell."""
    dist     = {origin: 0}
    frontier = [origin]
    while frontier:
        nxt_frontier = []
        for cell in frontier:
            for dr, dc in MOVES:
                nxt = (cell[0] + dr, cell[1] + dc)
                if not layout.walls[nxt] and nxt not in dist:
                    dist[nxt] = dist[cell] + 1
                    nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return dist
