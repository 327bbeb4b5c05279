# =============================================================
# src/hierarchy/dump.py
#
# Optional debug output: every primitive step of a rollout as
# one JSON line, for looking at what each sub-policy actually
# does offline (--dump-trajectories).
# =============================================================

from typing import TextIO

from src.hierarchy.agent import Trajectory
from src.schemas.records import StepRecord


def step_records(traj: Trajectory, iteration: int, group: int, worker: int) -> list[StepRecord]:
    return [
        StepRecord(
            iteration=iteration, group=group, worker=worker, t=t,
            obs=[float(x) for x in traj.obs[t]], action=int(traj.actions[t]),
            reward=float(traj.rewards[t]), done=bool(traj.dones[t]), k=int(traj.ks[t]),
        )
        for t in range(len(traj))
    ]


def write_trajectory(sink: TextIO, traj: Trajectory, iteration: int, group: int, worker: int) -> int:
    records = step_records(traj, iteration, group, worker)
    for rec in records:
        sink.write(rec.model_dump_json() + "\n")
    return len(records)
