import numpy as np
import pytest

from src.hierarchy.policies import init_master, init_sub_policies
from src.nn.network import init_params
from src.schemas.experiment import MlshConfig
from tests.helpers import small_config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_net(rng):
    return init_params(rng, input_dim=4, n_actions=3, hidden=5)


@pytest.fixture
def tiny_cfg() -> MlshConfig:
    return small_config()


@pytest.fixture
def bandit_agent(rng):
    subs   = init_sub_policies(rng, K=2, obs_dim=6, n_actions=5, hidden=16)
    master = init_master(rng, obs_dim=6, K=2, hidden=16)
    return master, subs
