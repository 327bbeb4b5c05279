"""
Acceptance-scale runs on the shipped presets. Each one meta-trains
for hundreds of iterations, so the whole module only runs with
`pytest -m slow`. Trained φ is cached per (preset, seed, overrides)
so the bandit checks share their runs.
"""

from functools import lru_cache

import numpy as np
import pytest

from src.core.rng import EVAL_TASK, stream
from src.engine import adapt
from src.engine.harness import meta_loop
from src.hierarchy.policies import SubPolicySet
from src.hierarchy.specialization import bandit_report
from src.schemas.experiment import MlshConfig, build_config
from src.schemas.records import SpecializationReport

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2)


@lru_cache(maxsize=None)
def _trained(preset: str, seed: int, overrides: tuple[str, ...] = ()) -> tuple[MlshConfig, SubPolicySet]:
    cfg = build_config(preset, overrides=list(overrides), seed=seed)
    return cfg, meta_loop(cfg).subs


def _specialization(cfg: MlshConfig, subs: SubPolicySet) -> SpecializationReport:
    return bandit_report(subs, stream(cfg.seed, EVAL_TASK, 1))


def _mean_curve(curves: list[adapt.Curve]) -> np.ndarray:
    return np.mean([c.returns for c in curves], axis=0)


def _adapted(cfg: MlshConfig, subs: SubPolicySet) -> np.ndarray:
    return _mean_curve(adapt.adapt_all(subs, cfg, cfg.adapt_budget, env=cfg.transfer_env))


def _scratch(cfg: MlshConfig) -> np.ndarray:
    target = cfg.transfer_env or cfg.env
    return _mean_curve([adapt.train_flat(task, cfg, cfg.adapt_budget, index=i, kind="scratch")
                        for i, task in enumerate(adapt.eval_tasks(cfg, target))])


def _shared_return(cfg: MlshConfig) -> float:
    """Flat policy trained across the distribution, evaluated once per held-out task."""
    policy = meta_loop(adapt.shared_config(cfg), kind="shared").subs.nets[0]
    return float(np.mean([
        adapt.train_flat(task, cfg, 0, index=i, init=policy, kind="shared").returns[0]
        for i, task in enumerate(adapt.eval_tasks(cfg))
    ]))


def _first_timestep(curve: np.ndarray, level: float, cfg: MlshConfig) -> float:
    hits = np.flatnonzero(curve >= level)
    return float(hits[0] * cfg.D * cfg.workers_per_group) if len(hits) else np.inf


# ── BANDITS ────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("seed", SEEDS)
def test_bandit_sub_policies_head_for_different_goals(seed):
    cfg, subs = _trained("bandits", seed)
    report = _specialization(cfg, subs)
    assert report.probes == 200
    assert report.distinct
    assert all(p.score >= 0.8 for p in report.sub_policies)


def test_bandit_adaptation_beats_shared_and_scratch():
    mlsh, shared, scratch = [], [], []
    for seed in SEEDS:
        cfg, subs = _trained("bandits", seed)
        assert (cfg.eval_tasks, cfg.adapt_budget) == (20, 10)
        mlsh.append(_adapted(cfg, subs))
        shared.append(_shared_return(cfg))
        scratch.append(_scratch(cfg))

    mlsh, scratch = np.mean(mlsh, axis=0), np.mean(scratch, axis=0)
    assert mlsh.shape == scratch.shape == (11,)
    assert mlsh[-1] >= 1.5 * np.mean(shared)
    assert np.all(mlsh >= scratch)


def test_removing_warmup_lowers_specialization():
    lower = 0
    for seed in SEEDS:
        cfg, subs = _trained("bandits", seed)
        ablated_cfg, ablated = _trained("bandits", seed, ("W=0",))
        lower += _specialization(ablated_cfg, ablated).score < _specialization(cfg, subs).score
    assert lower >= 2


# ── GRIDS ──────────────────────────────────────────────────────────────────────
# A grid episode returns 1 when it reaches the goal and 0
# otherwise, so mean return is the success rate.

def test_fourrooms_adaptation_reaches_high_success_before_scratch_reaches_half():
    mlsh, scratch = [], []
    for seed in SEEDS:
        cfg, subs = _trained("fourrooms", seed)
        assert cfg.eval_tasks == 10
        mlsh.append(_adapted(cfg, subs))
        scratch.append(_scratch(cfg))

    reached = _first_timestep(np.mean(mlsh, axis=0), 0.8, cfg)
    assert np.isfinite(reached)
    assert reached <= _first_timestep(np.mean(scratch, axis=0), 0.5, cfg)


def test_obstacle_transfer_finds_the_goal_where_scratch_never_does():
    found, scratch = 0, []
    for seed in SEEDS:
        cfg, subs = _trained("obstacle-transfer", seed)
        assert (cfg.transfer_env, cfg.adapt_budget) == ("obstacle", 50)
        found += _adapted(cfg, subs).max() > 0
        scratch.append(_scratch(cfg))

    assert found >= 2
    assert np.all(np.mean(scratch, axis=0) == 0.0)
