# =============================================================
# src/engine/harness.py
#
# Meta-training: the outer loop over tasks and iterations.
#
# Every group walks its own (W+U)-cycle, staggered by
# schedule_offsets(). One tick = one iteration for EVERY group:
#
#   position 0 of the cycle  → sample a task, fresh θ
#   position < W             → warmup: θ only
#   position ≥ W             → joint:  θ and φ
#
# φ persists for the whole run; θ lives for one task.
#
# STOPPING:
#   meta_iterations ticks, or earlier when plateau_patience is
#   set and the mean return has not improved for that many ticks.
#
# FAILURES:
#   A worker that raises or a non-finite loss aborts the tick
#   before anything is applied. The φ from the end of the
#   previous tick is written to phi_last_good.ckpt and
#   TrainingAborted is raised.
# =============================================================

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, TextIO

import numpy as np
from loguru import logger

from src.core.errors import DiagnosticsError, TrainingAborted, WorkerFailure
from src.core.rng import PHI_INIT, stream
from src.engine.group import GroupState, StepResult, Worker, make_workers, start_task, step_groups
from src.engine.metrics import METRICS_FILE, TIMINGS_FILE, JsonlWriter, timing, to_record
from src.engine.schedule import cycle_position, joint_groups, phase_at, schedule_offsets
from src.envs.registry import env_spec
from src.hierarchy.dump import write_trajectory
from src.hierarchy.policies import SubPolicySet, init_sub_policies
from src.nn.checkpoint import save_checkpoint
from src.schemas.experiment import MlshConfig
from src.schemas.records import MetricRecord, RunKind

CHECKPOINT_DIR = "checkpoints"
FINAL_CHECKPOINT = "phi_final.ckpt"
LAST_GOOD_CHECKPOINT = "phi_last_good.ckpt"


@dataclass
class MetaState:
    subs:      SubPolicySet
    groups:    list[GroupState]
    workers:   dict[int, list[Worker]] = field(repr=False)
    iteration: int = 0


@dataclass(frozen=True)
class MetaResult:
    subs:         SubPolicySet
    records:      list[MetricRecord]
    iterations:   int
    stopped_early: bool = False
    checkpoints:  tuple[Path, ...] = ()


def initial_subs(cfg: MlshConfig) -> SubPolicySet:
    spec = env_spec(cfg.env)
    return init_sub_policies(stream(cfg.seed, PHI_INIT), cfg.K, spec.obs_dim, spec.n_actions, cfg.hidden)


def init_state(cfg: MlshConfig, subs: Optional[SubPolicySet] = None) -> MetaState:
    offsets = schedule_offsets(cfg.groups, cfg.W, cfg.U)
    groups  = [GroupState(group_id=g, offset=off) for g, off in enumerate(offsets)]
    workers = {g: make_workers(cfg, g) for g in range(cfg.groups)}
    return MetaState(subs or initial_subs(cfg), groups, workers)


# ── ONE TICK ───────────────────────────────────────────────────────────────────

def advance_groups(state: MetaState, cfg: MlshConfig) -> list[GroupState]:
    """Place every group at its cycle position for this tick, resetting at position 0."""
    out = []
    for g in state.groups:
        pos = cycle_position(state.iteration, g.offset, cfg.W, cfg.U)
        if pos == 0 or g.task is None:
            g = start_task(g, cfg)
        out.append(replace(g, position=pos, phase=phase_at(state.iteration, g.offset, cfg.W, cfg.U)))
    return out


def tick(state: MetaState, cfg: MlshConfig, parallel: bool = True,
         keep_trajectories: bool = False) -> tuple[MetaState, StepResult]:
    groups = advance_groups(state, cfg)
    res = step_groups(groups, state.subs, cfg, state.workers, parallel, keep_trajectories)
    return MetaState(res.subs, res.groups, state.workers, state.iteration + 1), res


# ── META LOOP ──────────────────────────────────────────────────────────────────

def meta_loop(
    cfg:              MlshConfig,
    out_dir:          Optional[Path] = None,
    kind:             RunKind = "mlsh",
    parallel:         bool = True,
    subs:             Optional[SubPolicySet] = None,
    trajectory_sink:  Optional[TextIO] = None,
) -> MetaResult:
    state   = init_state(cfg, subs)
    records: list[MetricRecord] = []
    ckpts:   list[Path] = []
    phase   = None if kind == "mlsh" else "flat"
    per_tick_steps = cfg.D * cfg.total_workers
    ckpt_dir = out_dir / CHECKPOINT_DIR if out_dir is not None else None

    logger.info(
        f"Meta-training started | label={cfg.label} kind={kind} env={cfg.env} K={cfg.K} "
        f"N={cfg.N} W={cfg.W} U={cfg.U} G={cfg.groups} budget={cfg.meta_iterations} seed={cfg.seed}"
    )

    best, since_best, stopped_early = -np.inf, 0, False
    metrics = JsonlWriter(out_dir / METRICS_FILE if out_dir is not None else None)
    timings = JsonlWriter(out_dir / TIMINGS_FILE if out_dir is not None else None)
    try:
        while state.iteration < cfg.meta_iterations:
            i = state.iteration
            started = time.perf_counter()
            try:
                state, res = tick(state, cfg, parallel, keep_trajectories=trajectory_sink is not None)
            except (DiagnosticsError, WorkerFailure) as e:
                logger.error(f"Meta-iteration failed | iteration={i} error={e}")
                path = None
                if ckpt_dir is not None:
                    path = save_checkpoint(ckpt_dir / LAST_GOOD_CHECKPOINT, cfg.env,
                                           state.subs.nets, meta_iteration=i)
                raise TrainingAborted(f"training aborted at iteration {i}: {e}",
                                      str(path) if path else None) from e

            for report in res.reports:
                rec = to_record(report, label=cfg.label, kind=kind, seed=cfg.seed, iteration=i,
                                timesteps=i * per_tick_steps, phase=phase)
                records.append(rec)
                metrics.write(rec)
                if trajectory_sink is not None:
                    for w, traj in enumerate(report.trajectories):
                        write_trajectory(trajectory_sink, traj, i, report.group_id, w)
            timings.write(timing(i, time.perf_counter() - started))

            mean_return = float(np.mean([r.mean_return for r in res.reports]))
            joint = len(joint_groups(i, [g.offset for g in state.groups], cfg.W, cfg.U))
            logger.info(
                f"Meta-iteration {i + 1}/{cfg.meta_iterations} | mean_return={mean_return:.3f} "
                f"joint_groups={joint}/{cfg.groups} phi_blocks={len(res.applied[0]) if res.applied else 0}"
            )

            if ckpt_dir is not None and state.iteration % cfg.checkpoint_every == 0:
                ckpts.append(save_checkpoint(ckpt_dir / f"phi_{state.iteration:06d}.ckpt",
                                             cfg.env, state.subs.nets, meta_iteration=state.iteration))

            if cfg.plateau_patience is not None:
                if mean_return > best:
                    best, since_best = mean_return, 0
                else:
                    since_best += 1
                if since_best >= cfg.plateau_patience:
                    logger.warning(
                        f"Plateau stop | iteration={state.iteration} best_mean_return={best:.3f} "
                        f"patience={cfg.plateau_patience}"
                    )
                    stopped_early = True
                    break
    finally:
        metrics.close()
        timings.close()

    if ckpt_dir is not None:
        ckpts.append(save_checkpoint(ckpt_dir / FINAL_CHECKPOINT, cfg.env, state.subs.nets,
                                     meta_iteration=state.iteration))
    logger.info(
        f"Meta-training complete | label={cfg.label} iterations={state.iteration} "
        f"records={len(records)} phi={state.subs.checksum()[:12]}"
    )
    return MetaResult(state.subs, records, state.iteration, stopped_early, tuple(ckpts))
