# =============================================================
# src/engine/group.py
#
# Groups, workers and one synchronous training step.
#
# A GROUP is a set of workers that share one task and one
# master θ. Every worker owns its own RNG stream and its own
# environment instance; nothing mutable is shared between
# workers between barriers.
#
# ONE STEP (step_groups) over any number of groups:
#
#   barrier 1  every worker rolls out D steps with the
#              step-start θ_g and φ
#   barrier 2  per θ update step: every worker emits one θ
#              gradient, each group averages its own workers'
#              gradients and applies them to θ_g
#   barrier 3  per φ update step (joint groups only): every
#              worker emits a gradient per sub-policy it ran;
#              block k is averaged over its contributors and
#              applied to φ_k with φ_k's Adam state
#
# An update step is one minibatch or one epoch (PpoConfig.sync).
# Each worker draws its own minibatch plan right after its
# rollout; a worker whose plan is shorter than the longest one
# simply contributes nothing to the extra steps.
#
# Workers run on a module-level ThreadPoolExecutor. With one
# thread (or parallel=False) the builtin map runs the exact
# same functions in the same order.
#
# warmup_iteration / joint_iteration are step_groups over a
# single group, the plain sequential form of one iteration.
# =============================================================

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, TypeVar

import numpy as np
from loguru import logger

from src.config import settings
from src.core.errors import ContractViolation, WorkerFailure
from src.core.rng import GROUP_TASK, GROUP_THETA, WORKER, stream
from src.engine.aggregate import block_means, group_mean
from src.engine.schedule import GroupPhase
from src.envs.base import TaskSeed
from src.envs.registry import env_spec, make_env, sample_task
from src.hierarchy.agent import Trajectory, rollout
from src.hierarchy.policies import MasterPolicy, SubPolicySet, init_master
from src.hierarchy.views import master_view, sub_view
from src.nn.network import GradVector, NetParams
from src.rl.batch import RolloutBatch
from src.rl.gae import compute_gae
from src.rl.ppo import UpdateStats, apply_gradient, normalized, step_gradient, update_plan
from src.schemas.experiment import MlshConfig, PpoConfig

_thread_pool = ThreadPoolExecutor(max_workers=settings.MAX_WORKERS)

T = TypeVar("T")
R = TypeVar("R")


# ── STATE ──────────────────────────────────────────────────────────────────────

@dataclass
class Worker:
    group: int
    index: int
    rng:   np.random.Generator = field(repr=False)

    @property
    def id(self) -> tuple[int, int]:
        return (self.group, self.index)


def make_workers(cfg: MlshConfig, group_id: int, kind: int = WORKER) -> list[Worker]:
    return [Worker(group_id, w, stream(cfg.seed, kind, group_id, w))
            for w in range(cfg.workers_per_group)]


@dataclass(frozen=True)
class GroupState:
    group_id:   int
    offset:     int = 0
    task:       Optional[TaskSeed] = None
    master:     Optional[MasterPolicy] = None
    phase:      GroupPhase = "warmup"
    position:   int = 0
    tasks_seen: int = 0


def start_task(group: GroupState, cfg: MlshConfig) -> GroupState:
    """
    New task + fresh θ. Both draws are keyed by (group, task
    number), so every worker of the group gets the same task and
    the same initial θ.
    """
    n    = group.tasks_seen
    task = sample_task(cfg.env, stream(cfg.seed, GROUP_TASK, group.group_id, n))
    spec = env_spec(cfg.env)
    master = init_master(stream(cfg.seed, GROUP_THETA, group.group_id, n),
                         spec.obs_dim, cfg.K, cfg.hidden)
    logger.debug(f"Task start | group={group.group_id} task_seed={task.seed} n={n}")
    return replace(group, task=task, master=master, tasks_seen=n + 1)


@dataclass(frozen=True, eq=False)
class WorkerRollout:
    worker:       Worker
    group_id:     int
    traj:         Trajectory
    master_batch: RolloutBatch
    master_plan:  list[list[np.ndarray]] = field(repr=False)
    sub_batches:  Optional[dict[int, RolloutBatch]] = None
    sub_plans:    Optional[dict[int, list[list[np.ndarray]]]] = field(default=None, repr=False)


@dataclass(frozen=True)
class GroupReport:
    group_id:          int
    phase:             GroupPhase
    task_seed:         int
    mean_return:       float
    mean_macro_reward: float
    episodes:          int
    master_loss:       Optional[float] = None
    master_entropy:    Optional[float] = None
    sub_loss:          Optional[float] = None
    sub_entropy:       Optional[float] = None
    trajectories:      tuple[Trajectory, ...] = field(default=(), repr=False)


# ── BARRIER ────────────────────────────────────────────────────────────────────

def barrier_map(fn: Callable[[T], R], items: Iterable[T], ids: Iterable[tuple[int, int]],
                parallel: bool = True) -> list[R]:
    """
    fn over items, results in input order. Any exception becomes
    WorkerFailure; the caller applies nothing from a failed step.
    """
    def guarded(pair: tuple[tuple[int, int], T]) -> R:
        wid, item = pair
        try:
            return fn(item)
        except Exception as e:
            raise WorkerFailure(wid, e) from e

    pairs = list(zip(ids, items))
    if parallel and settings.MAX_WORKERS > 1 and len(pairs) > 1:
        return list(_thread_pool.map(guarded, pairs))
    return list(map(guarded, pairs))


# ── PER-WORKER WORK ────────────────────────────────────────────────────────────

def collect(worker: Worker, group: GroupState, subs: SubPolicySet, cfg: MlshConfig,
            with_subs: bool) -> WorkerRollout:
    if group.task is None or group.master is None:
        raise ContractViolation(f"group {group.group_id} has no task yet")
    traj = rollout(make_env(group.task), group.master, subs, cfg.D, cfg.N, worker.rng)

    mp = cfg.master_ppo
    master_batch = normalized(compute_gae(master_view(traj, cfg.N), mp.gamma, mp.lam,
                                          traj.master_bootstrap))
    master_plan = update_plan(len(master_batch), mp, worker.rng)
    sub_batches, sub_plans = None, None
    if with_subs:
        sp = cfg.sub_ppo
        sub_batches = {k: normalized(compute_gae(b, sp.gamma, sp.lam))
                       for k, b in sub_view(traj).items()}
        sub_plans = {k: update_plan(len(b), sp, worker.rng) for k, b in sub_batches.items()}
    return WorkerRollout(worker, group.group_id, traj, master_batch, master_plan, sub_batches, sub_plans)


def _plan_step(net: NetParams, batch: RolloutBatch, plan: list[list[np.ndarray]], s: int,
               cfg: PpoConfig) -> tuple[Optional[GradVector], UpdateStats]:
    if s >= len(plan):
        return None, UpdateStats()
    return step_gradient(net, batch, plan[s], cfg)


def _sub_step(r: WorkerRollout, subs: SubPolicySet, cfg: MlshConfig, s: int
              ) -> tuple[dict[int, Optional[GradVector]], list[UpdateStats]]:
    grads, stats = {}, []
    for k in range(subs.K):
        grad, st = _plan_step(subs.nets[k], r.sub_batches[k], r.sub_plans[k], s, cfg.sub_ppo)
        grads[k] = grad
        if st.steps:
            stats.append(st)
    return grads, stats


def _mean_or_none(values: list[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


# ── ONE STEP OVER MANY GROUPS ──────────────────────────────────────────────────

@dataclass(frozen=True)
class StepResult:
    groups:  list[GroupState]
    subs:    SubPolicySet
    reports: list[GroupReport]
    # per φ barrier step: the averaged blocks that were applied
    applied: list[dict[int, GradVector]] = field(default_factory=list)


def step_groups(groups: list[GroupState], subs: SubPolicySet, cfg: MlshConfig,
                workers: dict[int, list[Worker]], parallel: bool = True,
                keep_trajectories: bool = False) -> StepResult:
    pairs = [(w, g) for g in groups for w in workers[g.group_id]]
    ids   = [w.id for w, _ in pairs]

    # barrier 1: rollouts with step-start parameters
    rolls = barrier_map(lambda p: collect(p[0], p[1], subs, cfg, p[1].phase == "joint"),
                        pairs, ids, parallel)

    # barrier 2: θ, group by group, one barrier per plan step
    masters = {g.group_id: g.master for g in groups}
    m_stats: dict[int, list[UpdateStats]] = {g.group_id: [] for g in groups}
    for s in range(max(len(r.master_plan) for r in rolls)):
        outs = barrier_map(
            lambda r: _plan_step(masters[r.group_id].net, r.master_batch, r.master_plan, s, cfg.master_ppo),
            rolls, ids, parallel,
        )
        for g in groups:
            mine = [o for r, o in zip(rolls, outs) if r.group_id == g.group_id]
            if all(grad is None for grad, _ in mine):
                continue
            grad = group_mean([grad for grad, _ in mine])
            m    = masters[g.group_id]
            net, adam, _ = apply_gradient(m.net, m.adam, grad, cfg.master_ppo)
            masters[g.group_id] = MasterPolicy(net, adam)
            m_stats[g.group_id].extend(st for _, st in mine if st.steps)

    # barrier 3: φ, pooled over every joint-phase worker
    joint   = [r for r in rolls if r.sub_batches is not None]
    s_stats: dict[int, list[UpdateStats]] = {g.group_id: [] for g in groups}
    applied = []
    steps   = max((len(p) for r in joint for p in r.sub_plans.values()), default=0)
    for s in range(steps):
        outs   = barrier_map(lambda r: _sub_step(r, subs, cfg, s), joint,
                             [r.worker.id for r in joint], parallel)
        blocks = block_means([grads for grads, _ in outs], subs.K)
        for k, grad in blocks.items():
            net, adam, _ = apply_gradient(subs.nets[k], subs.adams[k], grad, cfg.sub_ppo)
            subs = subs.replace_one(k, net, adam)
        applied.append(blocks)
        for r, (_, stats) in zip(joint, outs):
            s_stats[r.group_id].extend(stats)

    new_groups, reports = [], []
    for g in groups:
        mine = [r for r in rolls if r.group_id == g.group_id]
        new_groups.append(replace(g, master=masters[g.group_id]))
        reports.append(GroupReport(
            group_id=g.group_id, phase=g.phase, task_seed=g.task.seed,
            mean_return=float(np.mean([r.traj.mean_return() for r in mine])),
            mean_macro_reward=float(np.mean([np.mean(r.master_batch.rewards) for r in mine])),
            episodes=sum(len(r.traj.episode_returns) for r in mine),
            master_loss=_mean_or_none([s.loss for s in m_stats[g.group_id]]),
            master_entropy=_mean_or_none([s.entropy for s in m_stats[g.group_id]]),
            sub_loss=_mean_or_none([s.loss for s in s_stats[g.group_id]]),
            sub_entropy=_mean_or_none([s.entropy for s in s_stats[g.group_id]]),
            trajectories=tuple(r.traj for r in mine) if keep_trajectories else (),
        ))
    return StepResult(new_groups, subs, reports, applied)


def evaluate(group: GroupState, subs: SubPolicySet, cfg: MlshConfig, workers: list[Worker],
             parallel: bool = True) -> GroupReport:
    """Rollouts only, no update. Used for the last point of a learning curve."""
    rolls = barrier_map(lambda w: collect(w, group, subs, cfg, False), workers,
                        [w.id for w in workers], parallel)
    return GroupReport(
        group_id=group.group_id, phase=group.phase, task_seed=group.task.seed,
        mean_return=float(np.mean([r.traj.mean_return() for r in rolls])),
        mean_macro_reward=float(np.mean([np.mean(r.master_batch.rewards) for r in rolls])),
        episodes=sum(len(r.traj.episode_returns) for r in rolls),
    )


# ── SINGLE-GROUP ITERATIONS ────────────────────────────────────────────────────

def warmup_iteration(group: GroupState, subs: SubPolicySet, cfg: MlshConfig,
                     workers: list[Worker], parallel: bool = True) -> tuple[GroupState, GroupReport]:
    """θ-only update. φ is read, never written."""
    if group.phase != "warmup":
        raise ContractViolation(f"group {group.group_id} is in phase '{group.phase}', not warmup")
    res = step_groups([group], subs, cfg, {group.group_id: workers}, parallel)
    return res.groups[0], res.reports[0]


def joint_iteration(group: GroupState, subs: SubPolicySet, cfg: MlshConfig,
                    workers: list[Worker], parallel: bool = True
                    ) -> tuple[GroupState, SubPolicySet, list[dict[int, GradVector]], GroupReport]:
    """θ and φ from one rollout. Also returns the φ blocks applied per update step."""
    if group.phase != "joint":
        raise ContractViolation(f"group {group.group_id} is in phase '{group.phase}', not joint")
    res = step_groups([group], subs, cfg, {group.group_id: workers}, parallel)
    return res.groups[0], res.subs, res.applied, res.reports[0]
