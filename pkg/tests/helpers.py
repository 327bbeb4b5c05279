import numpy as np

from src.envs.base import EnvSpec, Environment, TaskSeed
from src.schemas.experiment import MlshConfig, PpoConfig


def small_config(**update) -> MlshConfig:
    """Bandits at toy scale: seconds per run, same code paths as the presets."""
    ppo = dict(epochs=2, minibatch_size=64)
    raw = dict(
        label="tiny", env="bandits", K=2, N=10, T=50, W=2, U=1, D=100, hidden=16,
        groups=2, workers_per_group=1, meta_iterations=3, seed=7,
        eval_tasks=2, adapt_budget=2, checkpoint_every=2,
        master_ppo=PpoConfig(lr=0.01, **ppo), sub_ppo=PpoConfig(lr=3e-4, **ppo),
        baseline_ppo=PpoConfig(lr=3e-4, **ppo),
    )
    raw.update(update)
    return MlshConfig(**raw)


class CountingEnv(Environment):
    """Integer rewards drawn from its own seed, fixed horizon, obs = one-hot of t mod 6."""

    def __init__(self, horizon: int, seed: int = 0):
        super().__init__(EnvSpec(name="counting", obs_dim=6, n_actions=5, horizon=horizon),
                         TaskSeed("counting", seed))
        self._rng = np.random.default_rng(seed)

    def _obs(self):
        obs = np.zeros(6)
        obs[self.t % 6] = 1.0
        return obs

    def _reset(self):
        return self._obs()

    def _step(self, action):
        return self._obs(), float(self._rng.integers(0, 5)), False
