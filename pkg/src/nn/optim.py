# =============================================================
# src/nn/optim.py
#
# Adam and global-norm clipping over flat parameter vectors.
#
# Both are pure: adam_step returns NEW params and a NEW state,
# it never writes into the arrays it was given. That matters
# for the worker harness: the pre-update φ has to stay intact
# so a failed barrier step can be abandoned without rollback.
#
# DEFAULTS: β1=0.9, β2=0.999, ε=1e-5 (the PPO-era convention).
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.core.errors import ContractViolation, DiagnosticsError
from src.nn.network import GradVector, NetParams


@dataclass(frozen=True, eq=False)
class AdamState:
    m:     np.ndarray = field(repr=False)
    v:     np.ndarray = field(repr=False)
    step:  int   = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps:   float = 1e-5

    @classmethod
    def fresh(cls, size: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-5) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0, beta1, beta2, eps)

    @classmethod
    def for_net(cls, net: NetParams) -> "AdamState":
        return cls.fresh(net.size)


def clip_by_global_norm(grad: np.ndarray, max_norm: float) -> tuple[np.ndarray, float]:
    """Scale `grad` down so its L2 norm is at most max_norm. Returns (grad, pre-clip norm)."""
    norm = float(np.sqrt(np.sum(grad * grad)))
    if norm > max_norm and norm > 0.0:
        return grad * (max_norm / norm), norm
    return grad, norm


def adam_step(params: NetParams, grad: GradVector | np.ndarray, state: AdamState,
              lr: float) -> tuple[NetParams, AdamState]:
    g = grad.mean() if isinstance(grad, GradVector) else np.asarray(grad, dtype=np.float64)

    if g.shape != params.flat.shape or state.m.shape != params.flat.shape:
        raise ContractViolation(
            f"adam_step length mismatch: params={params.size} grad={g.shape[0]} "
            f"moments={state.m.shape[0]}"
        )
    if not np.all(np.isfinite(g)):
        bad = int(np.count_nonzero(~np.isfinite(g)))
        raise DiagnosticsError(
            "non-finite gradient rejected by adam_step",
            {"non_finite_entries": bad, "step": state.step},
        )

    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)

    new_flat = params.flat - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(m, v, t, state.beta1, state.beta2, state.eps)
    return params.with_flat(new_flat), new_state
