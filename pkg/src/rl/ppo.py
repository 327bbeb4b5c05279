# =============================================================
# src/rl/ppo.py
#
# Clipped-surrogate PPO on RolloutBatch, used unchanged for
# the master view and for every sub-policy view.
#
# LOSS (per minibatch of n rows):
#   ρ     = exp(log π_new(a|s) − log π_old(a|s))
#   L_pi  = −mean( min(ρA, clip(ρ, 1−ε, 1+ε)A) )
#   L_v   = c_v · mean( (V − R)² )
#   L_ent = −c_e · mean( H(π_new(·|s)) )
#   loss  = L_pi + L_v + L_ent
#
# The gradient is derived by hand w.r.t. logits and value
# and pushed through nn.network.backward.
#
# TWO WAYS TO USE IT:
#   ppo_update      → local training: every minibatch is one
#                     Adam step (baselines, quick experiments).
#   update_plan     → distributed training: a worker draws its
#     + step_gradient   minibatches up front, returns one
#     + apply_gradient  gradient per barrier step, and the
#                     harness averages it across workers and
#                     applies it. PpoConfig.sync picks the step:
#                     one minibatch (default) or one epoch.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
from loguru import logger

from src.core.errors import ContractViolation, DiagnosticsError
from src.nn.distributions import log_softmax
from src.nn.network import GradVector, NetParams, backward, forward
from src.nn.optim import AdamState, adam_step, clip_by_global_norm
from src.rl.batch import RolloutBatch
from src.rl.gae import normalize_advantages
from src.schemas.experiment import PpoConfig


class LossOutput(NamedTuple):
    loss:        float
    grad:        GradVector
    policy_loss: float
    value_loss:  float
    entropy:     float


@dataclass(frozen=True)
class UpdateStats:
    loss:    float = float("nan")
    entropy: float = float("nan")
    steps:   int   = 0


# ── LOSS ───────────────────────────────────────────────────────────────────────

def ppo_loss(minibatch: RolloutBatch, net: NetParams, cfg: PpoConfig,
             minibatch_index: int = 0) -> LossOutput:
    if not minibatch.finalized:
        raise ContractViolation("ppo_loss needs a batch with advantages and returns")
    n = len(minibatch)
    if n == 0:
        raise ContractViolation("ppo_loss called on an empty minibatch")

    actions = np.asarray(minibatch.actions, dtype=np.int64)
    if actions.min() < 0 or actions.max() >= net.n_actions:
        raise ContractViolation(
            f"batch actions outside [0, {net.n_actions}) for this network"
        )

    logits, values = forward(net, minibatch.obs)
    logp_all = log_softmax(logits)
    probs    = np.exp(logp_all)
    rows     = np.arange(n)
    new_logp = logp_all[rows, actions]

    adv     = minibatch.advantages
    ratio   = np.exp(new_logp - minibatch.logprobs)
    clipped = np.clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip)
    surr1   = ratio * adv
    surr2   = clipped * adv

    entropy     = -np.sum(probs * logp_all, axis=1)
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))
    value_loss  = float(np.mean((values - minibatch.returns) ** 2))
    mean_ent    = float(np.mean(entropy))
    loss        = policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * mean_ent

    if not np.isfinite(loss):
        raise DiagnosticsError(
            "PPO loss is not finite",
            {"minibatch": minibatch_index, "policy_loss": policy_loss,
             "value_loss": value_loss, "entropy": mean_ent},
        )

    # ∂loss/∂logp_new, zero where the clipped branch is the min
    # (the clip is then active and flat in ρ)
    unclipped = surr1 <= surr2
    g_logp    = -(adv * ratio * unclipped) / n

    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    g_logits  = g_logp[:, None] * (onehot - probs)
    g_logits += (cfg.ent_coef / n) * probs * (logp_all + entropy[:, None])
    g_values  = cfg.vf_coef * 2.0 * (values - minibatch.returns) / n

    grad = backward(net, minibatch.obs, g_logits, g_values)
    return LossOutput(loss, grad, policy_loss, value_loss, mean_ent)


# ── HELPERS ────────────────────────────────────────────────────────────────────

def normalized(batch: RolloutBatch) -> RolloutBatch:
    """Whole-batch advantage normalisation, done once before minibatching."""
    if not batch.finalized:
        raise ContractViolation("batch must go through compute_gae before PPO")
    return replace(batch, advantages=normalize_advantages(batch.advantages))


def _minibatches(n: int, size: int, rng: np.random.Generator) -> list[np.ndarray]:
    size = min(size, n)
    perm = rng.permutation(n)
    return [perm[i:i + size] for i in range(0, n, size)]


def apply_gradient(net: NetParams, adam: AdamState, grad: GradVector,
                   cfg: PpoConfig) -> tuple[NetParams, AdamState, float]:
    """Clip to max-grad-norm, then one Adam step at cfg.lr. Returns pre-clip norm too."""
    g, norm = clip_by_global_norm(grad.mean(), cfg.max_grad_norm)
    net, adam = adam_step(net, g, adam, cfg.lr)
    return net, adam, norm


# ── DISTRIBUTED: ONE BARRIER STEP → ONE GRADIENT ───────────────────────────────

def update_plan(n: int, cfg: PpoConfig, rng: np.random.Generator) -> list[list[np.ndarray]]:
    """
    Row-index chunks for every barrier step of one update. Each
    epoch is a fresh shuffle cut into minibatches; sync="minibatch"
    makes every minibatch its own step, sync="epoch" folds the
    whole epoch into one.
    """
    if n == 0:
        return []
    plan: list[list[np.ndarray]] = []
    for _ in range(cfg.epochs):
        chunks = _minibatches(n, cfg.minibatch_size, rng)
        if cfg.sync == "minibatch":
            plan.extend([idx] for idx in chunks)
        else:
            plan.append(chunks)
    return plan


def step_gradient(net: NetParams, batch: RolloutBatch, chunks: list[np.ndarray],
                  cfg: PpoConfig) -> tuple[Optional[GradVector], UpdateStats]:
    """
    Gradient of one barrier step, every chunk evaluated at `net`.
    Chunks are weighted by their row count, so the result is the
    mean over all rows in `chunks` however they were cut.
    `batch` must already be normalized(). (None, stats) when there
    are no rows: the worker has nothing to contribute.
    """
    rows = sum(len(idx) for idx in chunks)
    if rows == 0:
        return None, UpdateStats()

    total, losses, ents = None, [], []
    for i, idx in enumerate(chunks):
        out  = ppo_loss(batch.select(idx), net, cfg, minibatch_index=i)
        part = out.grad.total * (len(idx) / rows)
        total = part if total is None else total + part
        losses.append(out.loss)
        ents.append(out.entropy)

    return GradVector(total, 1), UpdateStats(float(np.mean(losses)), float(np.mean(ents)), len(chunks))


# ── LOCAL: FULL PPO UPDATE ─────────────────────────────────────────────────────

def ppo_update(net: NetParams, adam: AdamState, batch: RolloutBatch, cfg: PpoConfig,
               rng: np.random.Generator) -> tuple[NetParams, AdamState, UpdateStats]:
    """epochs × shuffled minibatches, clip, Adam, applied locally."""
    n = len(batch)
    if n == 0:
        return net, adam, UpdateStats()

    batch = normalized(batch)
    losses, ents = [], []
    for epoch in range(cfg.epochs):
        for i, idx in enumerate(_minibatches(n, cfg.minibatch_size, rng)):
            try:
                out = ppo_loss(batch.select(idx), net, cfg, minibatch_index=i)
            except DiagnosticsError as e:
                raise DiagnosticsError("PPO update aborted", {**e.context, "epoch": epoch}) from e
            net, adam, _ = apply_gradient(net, adam, out.grad, cfg)
            losses.append(out.loss)
            ents.append(out.entropy)

    stats = UpdateStats(float(np.mean(losses)), float(np.mean(ents)), len(losses))
    logger.debug(f"PPO update | rows={n} steps={stats.steps} loss={stats.loss:.4f} entropy={stats.entropy:.3f}")
    return net, adam, stats
