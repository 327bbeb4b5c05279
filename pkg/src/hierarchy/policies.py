# =============================================================
# src/hierarchy/policies.py
#
# The two parameter sets of the agent:
#
#   SubPolicySet (φ)  K networks obs → primitive logits + value.
#                     Shared by every task, persists for the
#                     whole meta-training run.
#   MasterPolicy (θ)  one network obs → K logits + value.
#                     Thrown away and re-drawn for every task.
#
# Each sub-policy carries its OWN Adam state. A sub-policy
# that received no experience in an update is skipped
# entirely: its weights and its moments stay bit-identical.
# =============================================================

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from src.core.errors import ContractViolation
from src.nn.network import HIDDEN, NetParams, init_params
from src.nn.optim import AdamState


@dataclass(frozen=True)
class SubPolicySet:
    nets:  tuple[NetParams, ...]
    adams: tuple[AdamState, ...]

    def __post_init__(self):
        if len(self.nets) < 1:
            raise ContractViolation("a SubPolicySet needs at least one sub-policy")
        if len(self.adams) != len(self.nets):
            raise ContractViolation("one Adam state per sub-policy")
        first = self.nets[0]
        for net in self.nets[1:]:
            if (net.input_dim, net.n_actions, net.hidden) != (first.input_dim, first.n_actions, first.hidden):
                raise ContractViolation("all sub-policies must share one network shape")

    @property
    def K(self) -> int:
        return len(self.nets)

    @property
    def obs_dim(self) -> int:
        return self.nets[0].input_dim

    @property
    def n_actions(self) -> int:
        return self.nets[0].n_actions

    def replace_one(self, k: int, net: NetParams, adam: AdamState) -> "SubPolicySet":
        nets, adams = list(self.nets), list(self.adams)
        nets[k], adams[k] = net, adam
        return SubPolicySet(tuple(nets), tuple(adams))

    def checksum(self) -> str:
        h = hashlib.sha256()
        for net in self.nets:
            h.update(np.ascontiguousarray(net.flat).tobytes())
        return h.hexdigest()

    @classmethod
    def from_nets(cls, nets: tuple[NetParams, ...]) -> "SubPolicySet":
        return cls(tuple(nets), tuple(AdamState.for_net(n) for n in nets))


@dataclass(frozen=True)
class MasterPolicy:
    net:  NetParams
    adam: AdamState

    @property
    def K(self) -> int:
        return self.net.n_actions


def init_sub_policies(rng: np.random.Generator, K: int, obs_dim: int, n_actions: int,
                      hidden: int = HIDDEN) -> SubPolicySet:
    if K < 1:
        raise ContractViolation(f"K must be at least 1, got {K}")
    return SubPolicySet.from_nets(tuple(init_params(rng, obs_dim, n_actions, hidden) for _ in range(K)))


def init_master(rng: np.random.Generator, obs_dim: int, K: int, hidden: int = HIDDEN) -> MasterPolicy:
    net = init_params(rng, obs_dim, K, hidden)
    return MasterPolicy(net, AdamState.for_net(net))
