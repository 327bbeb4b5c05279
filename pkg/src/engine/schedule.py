# =============================================================
# src/engine/schedule.py
#
# Staggered warmup. Every group runs the same (W+U)-long
# cycle (W warmup iterations, then U joint iterations) but
# starts at a different point in it, so that while one group
# warms up a fresh master another is already producing
# sub-policy gradients.
#
#   offset_g = floor(g·(W+U)/G)
#   position of group g at tick i = (i + offset_g) mod (W+U)
#   warmup if position < W, joint otherwise
#   position 0 = new task, fresh master
#
# With G·U ≥ W+U at least one group is joint at every tick.
# =============================================================

from __future__ import annotations

from typing import Literal

from loguru import logger

from src.core.errors import ContractViolation

GroupPhase = Literal["warmup", "joint"]


def schedule_offsets(G: int, W: int, U: int) -> list[int]:
    if G < 1:
        raise ContractViolation(f"need at least one group, got G={G}")
    if W < 0 or U < 1:
        raise ContractViolation(f"invalid cycle W={W} U={U}")
    cycle = W + U
    if G * U < cycle:
        logger.warning(
            f"Schedule may starve sub-policies | G={G} W={W} U={U} "
            f"(G·U={G * U} < W+U={cycle}): some ticks have no joint group"
        )
    return [(g * cycle) // G for g in range(G)]


def cycle_position(tick: int, offset: int, W: int, U: int) -> int:
    return (tick + offset) % (W + U)


def phase_at(tick: int, offset: int, W: int, U: int) -> GroupPhase:
    return "warmup" if cycle_position(tick, offset, W, U) < W else "joint"


def joint_groups(tick: int, offsets: list[int], W: int, U: int) -> list[int]:
    return [g for g, off in enumerate(offsets) if phase_at(tick, off, W, U) == "joint"]
