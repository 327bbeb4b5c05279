# =============================================================
# src/hierarchy/agent.py
#
# Acting and collecting experience with the two-level agent.
#
#   act()      one primitive step: maybe a master decision,
#              then a primitive action from the active φ_k
#   rollout()  D primitive steps on one env, auto-resetting
#              episodes, every annotation both views need
#
# MASTER DECISIONS happen when
#   step_in_segment == 0   (every N primitive steps), or
#   at an episode start    (even mid-segment)
# Between decisions the cached k is reused untouched.
#
# RNG: one Generator per worker. Each step draws one uniform
# for the master (on decision steps) and one for the primitive
# action, always in that order.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from src.core.errors import ContractViolation
from src.envs.base import Environment, TaskSeed
from src.hierarchy.policies import MasterPolicy, SubPolicySet
from src.nn.distributions import sample_categorical
from src.nn.network import forward


class ActOutput(NamedTuple):
    action:         int
    k:              int
    decided:        bool
    sub_logprob:    float
    sub_value:      float
    master_logprob: Optional[float]
    master_value:   Optional[float]


def act(master: MasterPolicy, subs: SubPolicySet, obs: np.ndarray, step_in_segment: int,
        cached_k: Optional[int], rng: np.random.Generator, episode_start: bool = False,
        N: Optional[int] = None) -> ActOutput:
    if step_in_segment < 0 or (N is not None and step_in_segment >= N):
        raise ContractViolation(f"step_in_segment={step_in_segment} outside [0, {N})")
    if master.K != subs.K:
        raise ContractViolation(f"master chooses among {master.K} sub-policies, set holds {subs.K}")

    decided = step_in_segment == 0 or episode_start
    m_logp = m_value = None
    if decided:
        logits, m_value = forward(master.net, obs)
        k, m_logp = sample_categorical(logits, rng)
    else:
        if cached_k is None:
            raise ContractViolation(
                f"no cached sub-policy index at step_in_segment={step_in_segment}"
            )
        if not 0 <= cached_k < subs.K:
            raise ContractViolation(f"cached k={cached_k} outside [0, {subs.K})")
        k = int(cached_k)

    logits, value = forward(subs.nets[k], obs)
    action, logp  = sample_categorical(logits, rng)
    return ActOutput(action, k, decided, logp, value, m_logp, m_value)


# ── TRAJECTORY ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    D primitive steps plus one record per master decision.
    Immutable once built, safe to hand between workers.

    sub_boot[t] is only meaningful where a run of the same k
    ends (k changes next step, episode ends, or t = D-1): it
    holds V_k(s_{t+1}), or 0 if step t ended the episode.
    """
    K:               int
    N:               int
    task:            TaskSeed
    obs:             np.ndarray = field(repr=False)      # (D, obs_dim)
    actions:         np.ndarray = field(repr=False)      # (D,)
    rewards:         np.ndarray = field(repr=False)
    dones:           np.ndarray = field(repr=False)
    ks:              np.ndarray = field(repr=False)
    sub_logprobs:    np.ndarray = field(repr=False)
    sub_values:      np.ndarray = field(repr=False)
    sub_boot:        np.ndarray = field(repr=False)

    decision_index:  np.ndarray = field(repr=False)      # (M,) step index of each decision
    master_logprobs: np.ndarray = field(repr=False)
    master_values:   np.ndarray = field(repr=False)
    master_bootstrap: float = 0.0

    final_obs:       Optional[np.ndarray] = field(default=None, repr=False)
    episode_returns: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def n_decisions(self) -> int:
        return len(self.decision_index)

    @property
    def decision_ks(self) -> np.ndarray:
        return self.ks[self.decision_index]

    def run_ends(self) -> np.ndarray:
        """True at every step after which the active run of k stops."""
        ends = np.ones(len(self), dtype=bool)
        ends[:-1] = (self.ks[1:] != self.ks[:-1]) | self.dones[:-1]
        return ends

    def mean_return(self) -> float:
        # a rollout shorter than one episode has no completed
        # episode; fall back to the collected reward
        if self.episode_returns:
            return float(np.mean(self.episode_returns))
        return float(np.sum(self.rewards))


# ── ROLLOUT ────────────────────────────────────────────────────────────────────

def rollout(env: Environment, master: MasterPolicy, subs: SubPolicySet, D: int, N: int,
            rng: np.random.Generator) -> Trajectory:
    if D <= 0:
        raise ContractViolation(f"rollout length must be positive, got D={D}")
    if N <= 0:
        raise ContractViolation(f"master action duration must be positive, got N={N}")
    if env.spec.obs_dim != subs.obs_dim or env.spec.n_actions != subs.n_actions:
        raise ContractViolation(
            f"env '{env.spec.name}' has obs={env.spec.obs_dim} actions={env.spec.n_actions}, "
            f"sub-policies expect obs={subs.obs_dim} actions={subs.n_actions}"
        )

    obs_buf  = np.zeros((D, env.spec.obs_dim), dtype=np.float64)
    actions  = np.zeros(D, dtype=np.int64)
    rewards  = np.zeros(D, dtype=np.float64)
    dones    = np.zeros(D, dtype=bool)
    ks       = np.zeros(D, dtype=np.int64)
    sub_logp = np.zeros(D, dtype=np.float64)
    sub_val  = np.zeros(D, dtype=np.float64)
    dec_idx, m_logp, m_val = [], [], []

    finished: list[float] = []
    ep_return = 0.0
    obs = env.reset()
    k: Optional[int] = None
    step_in_segment, episode_start = 0, True

    for t in range(D):
        out = act(master, subs, obs, step_in_segment, k, rng, episode_start=episode_start, N=N)
        if out.decided:
            dec_idx.append(t)
            m_logp.append(out.master_logprob)
            m_val.append(out.master_value)
        k = out.k

        next_obs, reward, done = env.step(out.action)
        obs_buf[t]  = obs
        actions[t]  = out.action
        rewards[t]  = reward
        dones[t]    = done
        ks[t]       = k
        sub_logp[t] = out.sub_logprob
        sub_val[t]  = out.sub_value
        ep_return  += reward

        if done:
            finished.append(ep_return)
            ep_return = 0.0
            obs = env.reset()
            step_in_segment, episode_start = 0, True
        else:
            obs = next_obs
            step_in_segment, episode_start = (step_in_segment + 1) % N, False

    final_obs = obs
    traj = Trajectory(
        K=subs.K, N=N, task=env.task,
        obs=obs_buf, actions=actions, rewards=rewards, dones=dones, ks=ks,
        sub_logprobs=sub_logp, sub_values=sub_val, sub_boot=np.zeros(D),
        decision_index=np.asarray(dec_idx, dtype=np.int64),
        master_logprobs=np.asarray(m_logp, dtype=np.float64),
        master_values=np.asarray(m_val, dtype=np.float64),
        final_obs=final_obs, episode_returns=tuple(finished),
    )
    sub_boot = _sub_bootstraps(traj, subs)
    master_boot = 0.0 if dones[-1] else float(forward(master.net, final_obs)[1])
    return replace(traj, sub_boot=sub_boot, master_bootstrap=master_boot)


def _sub_bootstraps(traj: Trajectory, subs: SubPolicySet) -> np.ndarray:
    D    = len(traj)
    boot = np.zeros(D, dtype=np.float64)
    cut  = traj.run_ends() & ~traj.dones
    for k in range(subs.K):
        rows = np.nonzero(cut & (traj.ks == k))[0]
        if rows.size == 0:
            continue
        # the state after step t is obs[t+1] unless t is the last step
        nxt = np.stack([traj.obs[t + 1] if t + 1 < D else traj.final_obs for t in rows])
        _, values = forward(subs.nets[k], nxt)
        boot[rows] = values
    return boot
