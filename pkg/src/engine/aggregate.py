# =============================================================
# src/engine/aggregate.py
#
# Barrier reductions.
#
#   θ  mean over the workers of ONE group
#   φ  block by block: φ_k's mean is taken over the workers
#        (of joint-phase groups) that actually ran φ_k this
#        iteration. Warmup groups and workers that never
#        activated k are simply not in the sum, so the divisor
#        is the contributor count, not G.
#
# Inputs arrive as lists ordered by ascending worker id and
# are summed left to right in that order. Float addition is
# not associative, so the order is part of the contract.
# =============================================================

from __future__ import annotations

from typing import Optional, Sequence

from src.core.errors import ContractViolation
from src.nn.network import GradVector


def reduce_in_order(grads: Sequence[Optional[GradVector]]) -> Optional[GradVector]:
    """Left-to-right sum of the non-None gradients. None if nobody contributed."""
    total = None
    for g in grads:
        if g is None:
            continue
        total = g if total is None else total + g
    return total


def group_mean(grads: Sequence[Optional[GradVector]]) -> GradVector:
    total = reduce_in_order(grads)
    if total is None:
        raise ContractViolation("group reduction with no worker gradients")
    return total


def block_means(per_worker: Sequence[dict[int, Optional[GradVector]]],
                K: int) -> dict[int, GradVector]:
    """
    per_worker[i][k] is worker i's gradient for φ_k (None when it
    has nothing for k). Returns only the blocks with ≥1 contributor;
    callers read .mean() off each entry.
    """
    out = {}
    for k in range(K):
        total = reduce_in_order([w.get(k) for w in per_worker])
        if total is not None:
            out[k] = total
    return out
