# =============================================================
# src/engine/adapt.py
#
# Learning curves on held-out tasks, and the flat baselines
# they are compared against.
#
#   test_time_adapt  φ frozen, fresh θ, warmup-style θ-only
#                    training on one task
#   train_flat       a single flat PPO policy on one task,
#                    from scratch or from a given start point
#   run_baseline     shared | scratch | finetune
#
# CURVES: budget+1 points per task. Point i is the mean return
# of the rollout collected BEFORE update i; the last point is
# an evaluation rollout after the final update. Point i sits at
# i·D·workers_per_group environment steps, so every curve of
# the same config shares one x-axis.
#
# FLAT POLICIES reuse the hierarchy with K=1: the master then
# has a single choice and the one sub-policy is the whole agent.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from loguru import logger

from src.core.errors import ConfigError
from src.core.rng import EVAL_TASK, EVAL_THETA, EVAL_WORKER, stream
from src.engine.group import GroupReport, GroupState, evaluate, make_workers, warmup_iteration
from src.engine.harness import MetaResult, meta_loop
from src.engine.metrics import METRICS_FILE, to_record, write_records
from src.envs.base import TaskSeed
from src.envs.registry import env_spec, make_env, sample_task
from src.hierarchy.agent import rollout
from src.hierarchy.policies import MasterPolicy, SubPolicySet, init_master, init_sub_policies
from src.hierarchy.views import master_view, sub_view
from src.nn.network import NetParams
from src.nn.optim import AdamState
from src.rl.batch import RolloutBatch
from src.rl.gae import compute_gae
from src.rl.ppo import ppo_update
from src.schemas.experiment import MlshConfig
from src.schemas.records import MetricRecord, RunKind

BaselineKind = Literal["shared", "scratch", "finetune"]


@dataclass(frozen=True)
class Curve:
    task:    TaskSeed
    records: list[MetricRecord]

    @property
    def returns(self) -> list[float]:
        return [r.mean_return for r in self.records]


def eval_tasks(cfg: MlshConfig, env: Optional[str] = None, n: Optional[int] = None) -> list[TaskSeed]:
    """Held-out tasks. Drawn from their own stream, so every method sees the same ones."""
    rng = stream(cfg.seed, EVAL_TASK)
    return [sample_task(env or cfg.env, rng) for _ in range(n or cfg.eval_tasks)]


def check_fits(subs: SubPolicySet, env: str) -> None:
    spec = env_spec(env)
    if (spec.obs_dim, spec.n_actions) != (subs.obs_dim, subs.n_actions):
        raise ConfigError(
            f"sub-policies take obs={subs.obs_dim} actions={subs.n_actions}, "
            f"env '{env}' has obs={spec.obs_dim} actions={spec.n_actions}"
        )


def _record(report: GroupReport, cfg: MlshConfig, kind: RunKind, label: str, i: int,
            phase: str) -> MetricRecord:
    return to_record(report, label=label, kind=kind, seed=cfg.seed, iteration=i,
                     timesteps=i * cfg.D * cfg.workers_per_group, phase=phase)


# ── TEST-TIME ADAPTATION ───────────────────────────────────────────────────────

def test_time_adapt(subs: SubPolicySet, task: TaskSeed, cfg: MlshConfig, budget: int,
                    index: int = 0, label: Optional[str] = None, parallel: bool = True) -> Curve:
    check_fits(subs, task.dist)
    spec    = env_spec(task.dist)
    master  = init_master(stream(cfg.seed, EVAL_THETA, index), spec.obs_dim, subs.K, cfg.hidden)
    group   = GroupState(group_id=index, task=task, master=master, phase="warmup", tasks_seen=1)
    workers = make_workers(cfg, index, kind=EVAL_WORKER)
    label   = label or cfg.label

    records = []
    for i in range(budget):
        group, report = warmup_iteration(group, subs, cfg, workers, parallel)
        records.append(_record(report, cfg, "adapt", label, i, "adapt"))
    records.append(_record(evaluate(group, subs, cfg, workers, parallel), cfg, "adapt", label, budget, "adapt"))

    logger.info(
        f"Adaptation done | task={task.dist}:{task.seed} budget={budget} "
        f"first={records[0].mean_return:.3f} last={records[-1].mean_return:.3f}"
    )
    return Curve(task, records)


def adapt_all(subs: SubPolicySet, cfg: MlshConfig, budget: int, env: Optional[str] = None,
              out_dir: Optional[Path] = None, parallel: bool = True) -> list[Curve]:
    curves = [test_time_adapt(subs, task, cfg, budget, index=i, parallel=parallel)
              for i, task in enumerate(eval_tasks(cfg, env))]
    if out_dir is not None:
        write_records(out_dir / METRICS_FILE, _by_iteration(curves))
    return curves


def _by_iteration(curves: list[Curve]) -> list[MetricRecord]:
    return sorted((r for c in curves for r in c.records), key=lambda r: (r.iteration, r.group))


# ── FLAT PPO ───────────────────────────────────────────────────────────────────

def _flat_batch(subs: SubPolicySet, master: MasterPolicy, task: TaskSeed, cfg: MlshConfig,
                rngs: list[np.random.Generator]) -> tuple[RolloutBatch, GroupReport]:
    gamma, lam = cfg.baseline_ppo.gamma, cfg.baseline_ppo.lam
    trajs = [rollout(make_env(task), master, subs, cfg.D, cfg.N, rng) for rng in rngs]
    batch = RolloutBatch.concat([compute_gae(sub_view(t)[0], gamma, lam) for t in trajs])
    report = GroupReport(
        group_id=0, phase="warmup", task_seed=task.seed,
        mean_return=float(np.mean([t.mean_return() for t in trajs])),
        mean_macro_reward=float(np.mean([np.mean(master_view(t).rewards) for t in trajs])),
        episodes=sum(len(t.episode_returns) for t in trajs),
    )
    return batch, report


def _fresh_flat(cfg: MlshConfig, obs_dim: int, n_actions: int, index: int) -> NetParams:
    return init_sub_policies(stream(cfg.seed, EVAL_THETA, index, 0), 1, obs_dim, n_actions, cfg.hidden).nets[0]


def train_flat(task: TaskSeed, cfg: MlshConfig, budget: int, index: int = 0,
               init: Optional[NetParams] = None, kind: RunKind = "scratch",
               label: Optional[str] = None) -> Curve:
    spec   = env_spec(task.dist)
    net    = init if init is not None else _fresh_flat(cfg, spec.obs_dim, spec.n_actions, index)
    if (net.input_dim, net.n_actions) != (spec.obs_dim, spec.n_actions):
        raise ConfigError(
            f"flat policy takes obs={net.input_dim}, env '{task.dist}' has obs={spec.obs_dim}"
        )
    adam   = AdamState.for_net(net)
    master = init_master(stream(cfg.seed, EVAL_THETA, index, 1), spec.obs_dim, 1, cfg.hidden)
    rngs   = [w.rng for w in make_workers(cfg, index, kind=EVAL_WORKER)]
    label  = label or cfg.label

    records = []
    for i in range(budget + 1):
        subs = SubPolicySet.from_nets((net,))
        batch, report = _flat_batch(subs, master, task, cfg, rngs)
        records.append(_record(report, cfg, kind, label, i, "flat"))
        if i < budget:
            net, adam, _ = ppo_update(net, adam, batch, cfg.baseline_ppo, rngs[0])

    logger.info(
        f"Flat PPO done | kind={kind} task={task.dist}:{task.seed} budget={budget} "
        f"first={records[0].mean_return:.3f} last={records[-1].mean_return:.3f}"
    )
    return Curve(task, records)


# ── BASELINES ──────────────────────────────────────────────────────────────────

def shared_config(cfg: MlshConfig) -> MlshConfig:
    """One flat policy across the task distribution, tasks switched at the MLSH cadence."""
    return cfg.model_copy(update={"K": 1, "W": 0, "U": cfg.W + cfg.U, "label": f"{cfg.label}/shared"})


def run_baseline(kind: BaselineKind, cfg: MlshConfig, out_dir: Optional[Path] = None,
                 parallel: bool = True) -> list[MetricRecord]:
    target = cfg.transfer_env or cfg.env
    budget = cfg.adapt_budget

    if kind == "shared":
        return meta_loop(shared_config(cfg), out_dir, kind="shared", parallel=parallel).records

    if kind == "scratch":
        curves = [train_flat(task, cfg, budget, index=i, kind="scratch", label=f"{cfg.label}/scratch")
                  for i, task in enumerate(eval_tasks(cfg, target))]
    elif kind == "finetune":
        shared: MetaResult = meta_loop(shared_config(cfg), out_dir / "shared" if out_dir else None,
                                       kind="shared", parallel=parallel)
        start = shared.subs.nets[0]
        curves = [train_flat(task, cfg, budget, index=i, init=start, kind="finetune",
                             label=f"{cfg.label}/finetune")
                  for i, task in enumerate(eval_tasks(cfg, target))]
    else:
        raise ConfigError(f"unknown baseline '{kind}' (known: shared, scratch, finetune)")

    records = _by_iteration(curves)
    if out_dir is not None:
        write_records(out_dir / METRICS_FILE, records)
    return records
