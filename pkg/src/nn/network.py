# =============================================================
# src/nn/network.py
#
# The policy-value network used by BOTH levels of the agent:
# the master (K outputs) and every sub-policy (primitive
# action outputs).
#
# ARCHITECTURE:
#   obs ─► dense(hidden) ─► tanh ─► dense(hidden) ─► tanh ─┬─► dense(A) → logits
#                                                           └─► dense(1) → value
#   Two hidden layers of width 64 by default. The value head
#   shares the trunk with the policy head.
#
# STORAGE:
#   All parameters live in ONE contiguous float64 vector.
#   Layer matrices are views carved out of it in a fixed
#   order, so "flatten" and "unflatten" are slicing, not
#   copying, and the round trip is exact by construction.
#
#   order: W1 (h×in) b1 (h) W2 (h×h) b2 (h)
#          Wpi (A×h) bpi (A) Wv (1×h) bv (1)
#
# Everything here is a pure function of its inputs: forward
# and backward never mutate the NetParams they receive.
# =============================================================

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.core.errors import ContractViolation

HIDDEN = 64


# ── LAYOUT ─────────────────────────────────────────────────────────────────────

def layer_shapes(input_dim: int, n_actions: int, hidden: int = HIDDEN) -> list[tuple[str, tuple[int, ...]]]:
    return [
        ("W1",  (hidden, input_dim)),
        ("b1",  (hidden,)),
        ("W2",  (hidden, hidden)),
        ("b2",  (hidden,)),
        ("Wpi", (n_actions, hidden)),
        ("bpi", (n_actions,)),
        ("Wv",  (1, hidden)),
        ("bv",  (1,)),
    ]


def param_count(input_dim: int, n_actions: int, hidden: int = HIDDEN) -> int:
    return int(sum(np.prod(shape) for _, shape in layer_shapes(input_dim, n_actions, hidden)))


# ── PARAMETERS ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class NetParams:
    input_dim: int
    n_actions: int
    hidden:    int
    flat:      np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = param_count(self.input_dim, self.n_actions, self.hidden)
        if self.flat.shape != (expected,):
            raise ContractViolation(
                f"flat parameter vector has shape {self.flat.shape}, "
                f"expected ({expected},) for in={self.input_dim} "
                f"A={self.n_actions} h={self.hidden}"
            )

    @property
    def size(self) -> int:
        return self.flat.shape[0]

    def unpack(self) -> dict[str, np.ndarray]:
        """Named read-only views into the flat vector."""
        views  = {}
        offset = 0
        for name, shape in layer_shapes(self.input_dim, self.n_actions, self.hidden):
            n = int(np.prod(shape))
            view = self.flat[offset:offset + n].reshape(shape)
            view.flags.writeable = False
            views[name] = view
            offset += n
        return views

    def with_flat(self, flat: np.ndarray) -> "NetParams":
        return NetParams(self.input_dim, self.n_actions, self.hidden, np.asarray(flat, dtype=np.float64))

    @classmethod
    def pack(cls, arrays: dict[str, np.ndarray], input_dim: int, n_actions: int,
             hidden: int = HIDDEN) -> "NetParams":
        parts = []
        for name, shape in layer_shapes(input_dim, n_actions, hidden):
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != shape:
                raise ContractViolation(f"{name} has shape {arr.shape}, expected {shape}")
            parts.append(arr.ravel())
        return cls(input_dim, n_actions, hidden, np.concatenate(parts))

    @classmethod
    def zeros(cls, input_dim: int, n_actions: int, hidden: int = HIDDEN) -> "NetParams":
        return cls(input_dim, n_actions, hidden,
                   np.zeros(param_count(input_dim, n_actions, hidden), dtype=np.float64))


# ── GRADIENTS ──────────────────────────────────────────────────────────────────
# A gradient is a running SUM plus how many contributions went
# into it. Dividing happens only when the mean is read, so
# adding gradients from several workers and then averaging
# gives the same bits no matter how the sum was split up
# (as long as the addition order is fixed).

@dataclass(frozen=True, eq=False)
class GradVector:
    total: np.ndarray
    count: int = 1

    def __add__(self, other: "GradVector") -> "GradVector":
        if self.total.shape != other.total.shape:
            raise ContractViolation(
                f"cannot add gradients of length {self.total.shape[0]} "
                f"and {other.total.shape[0]}"
            )
        return GradVector(self.total + other.total, self.count + other.count)

    def mean(self) -> np.ndarray:
        if self.count <= 0:
            raise ContractViolation("mean of a gradient with zero contributions")
        return self.total / self.count


# ── INITIALISATION ─────────────────────────────────────────────────────────────
# Orthogonal hidden weights (gain √2), a policy head scaled by
# 0.01 so the initial policy is close to uniform, value head
# gain 1, all biases zero.

def _orthogonal(rng: np.random.Generator, shape: tuple[int, int], gain: float) -> np.ndarray:
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_params(rng: np.random.Generator, input_dim: int, n_actions: int,
                hidden: int = HIDDEN) -> NetParams:
    if input_dim <= 0 or n_actions <= 0 or hidden <= 0:
        raise ContractViolation(
            f"network dims must be positive (in={input_dim}, A={n_actions}, h={hidden})"
        )
    arrays = {
        "W1":  _orthogonal(rng, (hidden, input_dim), np.sqrt(2.0)),
        "b1":  np.zeros(hidden),
        "W2":  _orthogonal(rng, (hidden, hidden), np.sqrt(2.0)),
        "b2":  np.zeros(hidden),
        "Wpi": _orthogonal(rng, (n_actions, hidden), 0.01),
        "bpi": np.zeros(n_actions),
        "Wv":  _orthogonal(rng, (1, hidden), 1.0),
        "bv":  np.zeros(1),
    }
    return NetParams.pack(arrays, input_dim, n_actions, hidden)


# ── FORWARD ────────────────────────────────────────────────────────────────────

def _as_batch(net: NetParams, obs: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(obs, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ContractViolation(
            f"observation shape {np.shape(obs)} does not match network input dim {net.input_dim}"
        )
    if not np.all(np.isfinite(x)):
        raise ContractViolation("observation contains non-finite values")
    return x, single


def _trunk(p: dict[str, np.ndarray], x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h1 = np.tanh(x @ p["W1"].T + p["b1"])
    h2 = np.tanh(h1 @ p["W2"].T + p["b2"])
    return h1, h2


def forward(net: NetParams, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray | float]:
    """
    obs (in,)  → (logits (A,), value float)
    obs (B,in) → (logits (B,A), values (B,))
    """
    x, single = _as_batch(net, obs)
    p = net.unpack()
    _, h2  = _trunk(p, x)
    logits = h2 @ p["Wpi"].T + p["bpi"]
    values = (h2 @ p["Wv"].T + p["bv"])[:, 0]
    if single:
        return logits[0], float(values[0])
    return logits, values


# ── BACKWARD ───────────────────────────────────────────────────────────────────
# Gradient of  Σ_b [ logit_grad_b · logits_b + value_grad_b · value_b ]
# with respect to every parameter. The forward pass is
# recomputed here so the function stays pure.

def backward(net: NetParams, obs: np.ndarray, logit_grad: np.ndarray,
             value_grad: np.ndarray | float) -> GradVector:
    x, single = _as_batch(net, obs)
    g_logits = np.asarray(logit_grad, dtype=np.float64)
    g_values = np.asarray(value_grad, dtype=np.float64)
    if single:
        g_logits = g_logits[None, :] if g_logits.ndim == 1 else g_logits
        g_values = g_values.reshape(1)
    batch = x.shape[0]
    if g_logits.shape != (batch, net.n_actions):
        raise ContractViolation(
            f"logit gradient shape {np.shape(logit_grad)} does not match "
            f"batch {batch} × actions {net.n_actions}"
        )
    if g_values.shape != (batch,):
        raise ContractViolation(
            f"value gradient shape {np.shape(value_grad)} does not match batch {batch}"
        )

    p = net.unpack()
    h1, h2 = _trunk(p, x)

    # heads
    d_Wpi = g_logits.T @ h2
    d_bpi = g_logits.sum(axis=0)
    d_Wv  = g_values[None, :] @ h2
    d_bv  = np.array([g_values.sum()])

    # second hidden layer
    d_h2 = g_logits @ p["Wpi"] + g_values[:, None] @ p["Wv"]
    d_z2 = d_h2 * (1.0 - h2 * h2)
    d_W2 = d_z2.T @ h1
    d_b2 = d_z2.sum(axis=0)

    # first hidden layer
    d_h1 = d_z2 @ p["W2"]
    d_z1 = d_h1 * (1.0 - h1 * h1)
    d_W1 = d_z1.T @ x
    d_b1 = d_z1.sum(axis=0)

    flat = np.concatenate([
        d_W1.ravel(), d_b1, d_W2.ravel(), d_b2,
        d_Wpi.ravel(), d_bpi, d_Wv.ravel(), d_bv,
    ])
    return GradVector(flat, 1)
