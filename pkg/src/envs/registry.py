# =============================================================
# src/envs/registry.py
#
# Name → task distribution. The rest of the code never imports
# a concrete environment class; it asks the registry to
#   sample_task(name, rng)  → TaskSeed     (M ~ P_M)
#   make_env(task)          → Environment  (fresh instance)
#   env_spec(name)          → EnvSpec      (shared shapes)
#
# DISTRIBUTIONS:
#   bandits         two random goals, hidden correct flag
#   fourrooms       classic 13×13 map, random goal
#   fourrooms-wide  25×25 four rooms, random goal (meta-training
#                   source for the obstacle transfer)
#   obstacle        single fixed sparse maze (transfer only)
# =============================================================

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.core.errors import ConfigError
from src.envs import bandits
from src.envs.base import EnvSpec, Environment, TaskSeed
from src.envs.gridworld import (
    OBSTACLE_GOAL,
    GridWorld,
    Layout,
    four_rooms,
    four_rooms_wide,
    goal_candidates,
    obstacle_course,
)

_SEED_SPACE = 2 ** 31 - 1


@dataclass(frozen=True)
class TaskDistribution:
    name:    str
    horizon: int
    sample:  Callable[[np.random.Generator], TaskSeed]
    build:   Callable[[TaskSeed], Environment]


def _random_seed_task(name: str) -> Callable[[np.random.Generator], TaskSeed]:
    return lambda rng: TaskSeed(name, int(rng.integers(_SEED_SPACE)))


def grid_goal(layout: Layout, task: TaskSeed) -> tuple[int, int]:
    candidates = goal_candidates(layout)
    return candidates[int(task.rng().integers(len(candidates)))]


def _random_goal_grid(layout_fn: Callable[[], Layout], horizon: int) -> Callable[[TaskSeed], Environment]:
    def build(task: TaskSeed) -> Environment:
        layout = layout_fn()
        return GridWorld(layout, task, grid_goal(layout, task), horizon)
    return build


_DISTRIBUTIONS: dict[str, TaskDistribution] = {
    "bandits": TaskDistribution(
        name="bandits", horizon=bandits.HORIZON,
        sample=_random_seed_task("bandits"),
        build=lambda task: bandits.MovingBandits2D(task),
    ),
    "fourrooms": TaskDistribution(
        name="fourrooms", horizon=100,
        sample=_random_seed_task("fourrooms"),
        build=_random_goal_grid(four_rooms, 100),
    ),
    "fourrooms-wide": TaskDistribution(
        name="fourrooms-wide", horizon=200,
        sample=_random_seed_task("fourrooms-wide"),
        build=_random_goal_grid(four_rooms_wide, 200),
    ),
    "obstacle": TaskDistribution(
        name="obstacle", horizon=400,
        sample=lambda rng: TaskSeed("obstacle", 0),
        build=lambda task: GridWorld(obstacle_course(), task, OBSTACLE_GOAL, 400),
    ),
}


def known_envs() -> list[str]:
    return sorted(_DISTRIBUTIONS)


def _get(name: str) -> TaskDistribution:
    if name not in _DISTRIBUTIONS:
        raise ConfigError(f"unknown task distribution '{name}' (known: {', '.join(known_envs())})")
    return _DISTRIBUTIONS[name]


def horizon_for(name: str) -> int:
    return _get(name).horizon


def sample_task(name: str, rng: np.random.Generator) -> TaskSeed:
    return _get(name).sample(rng)


def make_env(task: TaskSeed) -> Environment:
    return _get(task.dist).build(task)


def env_spec(name: str) -> EnvSpec:
    # every task of a distribution has the same dimensions, so any task will do
    return make_env(TaskSeed(name, 0)).spec
