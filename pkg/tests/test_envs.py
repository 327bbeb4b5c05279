import numpy as np
import pytest

from src.core.errors import ConfigError, ContractViolation
from src.envs.bandits import MovingBandits2D
from src.envs.base import TaskSeed
from src.envs.gridworld import (
    OBSTACLE_GOAL,
    GridWorld,
    bfs_distances,
    four_rooms,
    four_rooms_wide,
    goal_candidates,
    obstacle_course,
)
from src.envs.registry import env_spec, grid_goal, make_env, sample_task


@pytest.mark.parametrize("name, dim, actions, horizon", [
    ("bandits", 6, 5, 50),
    ("fourrooms", 338, 4, 100),
    ("fourrooms-wide", 1250, 4, 200),
    ("obstacle", 1250, 4, 400),
])
def test_spec_shapes(name, dim, actions, horizon):
    spec = env_spec(name)
    assert (spec.obs_dim, spec.n_actions, spec.horizon) == (dim, actions, horizon)
    obs = make_env(TaskSeed(name, 3)).reset()
    assert obs.shape == (dim,)


def test_unknown_distribution_is_a_config_error(rng):
    with pytest.raises(ConfigError, match="unknown task distribution"):
        sample_task("mazes", rng)


# ── BANDITS ────────────────────────────────────────────────────────────────────

def test_same_seed_builds_the_same_bandit():
    a, b = MovingBandits2D(TaskSeed("bandits", 11)), MovingBandits2D(TaskSeed("bandits", 11))
    np.testing.assert_array_equal(a.goals, b.goals)
    assert a.correct == b.correct


def test_goals_lie_inside_the_sampling_square(rng):
    for _ in range(200):
        env = make_env(sample_task("bandits", rng))
        assert np.all((env.goals >= 0.1) & (env.goals <= 0.9))


def test_correct_goal_is_hidden_from_the_observation():
    task = TaskSeed("bandits", 5)
    a, b = MovingBandits2D(task, correct=0), MovingBandits2D(task, correct=1)
    oa, ob = a.reset(), b.reset()
    np.testing.assert_array_equal(oa, ob)
    for action in [3, 3, 0, 2, 1, 4] * 5:
        oa, _, _ = a.step(action)
        ob, _, _ = b.step(action)
        np.testing.assert_array_equal(oa, ob)


def test_six_steps_right_reach_a_goal_at_point_nine():
    env = MovingBandits2D(TaskSeed("bandits", 0), correct=0)
    env.goals = np.array([[0.9, 0.5], [0.1, 0.1]])
    env.reset()
    rewards = [env.step(3)[1] for _ in range(6)]
    assert rewards == [0.0] * 5 + [1.0]
    # staying on the goal keeps paying
    assert env.step(4)[1] == 1.0


def test_position_is_clamped_to_the_unit_square():
    env = MovingBandits2D(TaskSeed("bandits", 0))
    env.reset()
    for _ in range(30):
        obs, _, _ = env.step(0)
    assert obs[1] == 1.0


def test_bandit_episode_ends_at_exactly_fifty_steps():
    env = MovingBandits2D(TaskSeed("bandits", 1))
    env.reset()
    dones = [env.step(4)[2] for _ in range(50)]
    assert dones == [False] * 49 + [True]


def test_out_of_range_action_is_rejected():
    env = MovingBandits2D(TaskSeed("bandits", 1))
    env.reset()
    with pytest.raises(ContractViolation):
        env.step(5)


# ── GRIDS ──────────────────────────────────────────────────────────────────────

def test_four_rooms_has_104_free_cells_and_103_goals():
    assert len(four_rooms().free_cells()) == 104
    assert len(goal_candidates(four_rooms())) == 103


def test_four_rooms_goal_sampling_covers_every_candidate(rng):
    layout = four_rooms()
    seen = {grid_goal(layout, sample_task("fourrooms", rng)) for _ in range(3000)}
    assert seen == set(goal_candidates(layout))


@pytest.mark.parametrize("layout_fn", [four_rooms, four_rooms_wide, obstacle_course])
def test_every_free_cell_is_reachable_from_the_start(layout_fn):
    layout = layout_fn()
    assert set(bfs_distances(layout, layout.start)) == set(layout.free_cells())


def test_obstacle_goal_needs_a_long_detour():
    layout = obstacle_course()
    # straight-line distance is 22 moves; the gaps force a snake
    assert bfs_distances(layout, layout.start)[OBSTACLE_GOAL] > 60


def test_walls_block_movement():
    env = GridWorld(four_rooms(), TaskSeed("fourrooms", 0), goal=(11, 11), horizon=100)
    start = env.reset()
    for action in (0, 2):
        obs, reward, done = env.step(action)
        np.testing.assert_array_equal(obs, start)
        assert (reward, done) == (0.0, False)


def test_reaching_the_goal_pays_and_ends_the_episode():
    env = GridWorld(four_rooms(), TaskSeed("fourrooms", 0), goal=(1, 2), horizon=100)
    env.reset()
    _, reward, done = env.step(3)
    assert (reward, done) == (1.0, True)


def test_grid_observation_is_two_one_hots():
    env = GridWorld(four_rooms(), TaskSeed("fourrooms", 0), goal=(5, 5), horizon=100)
    obs = env.reset()
    assert obs.sum() == 2.0
    assert obs[1 * 13 + 1] == 1.0
    assert obs[169 + 5 * 13 + 5] == 1.0
    np.testing.assert_array_equal(env.observe_at((1, 1)), obs)


def test_grid_horizon_ends_the_episode():
    env = make_env(TaskSeed("fourrooms", 9))
    env.goal = (11, 11)
    env.reset()
    dones = [env.step(0)[2] for _ in range(100)]
    assert dones == [False] * 99 + [True]


def test_obstacle_is_a_single_fixed_task(rng):
    tasks = {sample_task("obstacle", rng) for _ in range(10)}
    assert tasks == {TaskSeed("obstacle", 0)}
    assert make_env(TaskSeed("obstacle", 0)).goal == OBSTACLE_GOAL
