# =============================================================
# src/nn/distributions.py
#
# Softmax / categorical helpers shared by the master (choosing
# a sub-policy index) and the sub-policies (choosing a
# primitive action).
#
# NUMERICAL STABILITY:
# exp(1000) overflows float64. Every function here subtracts
# the row max before exponentiating, so logits like [1000, 0]
# are handled without inf/nan.
# =============================================================

import numpy as np

from src.core.errors import ContractViolation


def logsumexp(logits: np.ndarray) -> np.ndarray | float:
    z = np.asarray(logits, dtype=np.float64)
    m = np.max(z, axis=-1, keepdims=True)
    out = m + np.log(np.sum(np.exp(z - m), axis=-1, keepdims=True))
    out = np.squeeze(out, axis=-1)
    return float(out) if out.ndim == 0 else out


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    return z - np.expand_dims(logsumexp(z), -1)


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def entropy(logits: np.ndarray) -> np.ndarray | float:
    logp = log_softmax(logits)
    h = -np.sum(np.exp(logp) * logp, axis=-1)
    return float(h) if np.ndim(h) == 0 else h


def sample_categorical(logits: np.ndarray, rng: np.random.Generator) -> tuple[int, float]:
    """
    Draw one index from softmax(logits).
    Returns (index, log-probability of that index).
    Consumes exactly one uniform from `rng` per call.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] == 0:
        raise ContractViolation(f"expected a non-empty 1-D logit vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ContractViolation("logits contain non-finite values")

    logp = log_softmax(z)
    cdf  = np.cumsum(np.exp(logp))
    u    = rng.random() * cdf[-1]
    index = int(np.searchsorted(cdf, u, side="right"))
    index = min(index, z.shape[0] - 1)
    return index, float(logp[index])
