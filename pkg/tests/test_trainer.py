import numpy as np
import pytest

from src.config import settings
from src.core.errors import ContractViolation, DiagnosticsError, TrainingAborted
from src.core.rng import GROUP_THETA, stream
from src.engine import group as group_mod
from src.engine.group import GroupState, joint_iteration, make_workers, start_task, warmup_iteration
from src.engine.harness import (
    CHECKPOINT_DIR,
    FINAL_CHECKPOINT,
    LAST_GOOD_CHECKPOINT,
    advance_groups,
    init_state,
    initial_subs,
    meta_loop,
    tick,
)
from src.envs.base import TaskSeed
from src.hierarchy.policies import MasterPolicy, init_master
from src.nn.checkpoint import load_checkpoint
from src.nn.network import NetParams
from src.nn.optim import AdamState
from src.schemas.experiment import PpoConfig, build_config
from tests.helpers import small_config


def _records(result):
    return [r.model_dump() for r in result.records]


def _master_without(k_banned: int, K: int, seed: int) -> MasterPolicy:
    net = init_master(np.random.default_rng(seed), 6, K, 16).net
    arrays = {name: a.copy() for name, a in net.unpack().items()}
    arrays["bpi"][k_banned] = -1e9
    packed = NetParams.pack(arrays, 6, K, 16)
    return MasterPolicy(packed, AdamState.for_net(packed))


# ── SINGLE ITERATIONS ──────────────────────────────────────────────────────────

def test_warmup_iteration_only_moves_theta():
    cfg   = small_config()
    subs  = initial_subs(cfg)
    group = start_task(GroupState(group_id=0), cfg)
    new, report = warmup_iteration(group, subs, cfg, make_workers(cfg, 0))
    assert not np.array_equal(new.master.net.flat, group.master.net.flat)
    assert report.sub_loss is None
    assert report.phase == "warmup"


def test_iteration_in_the_wrong_phase_is_rejected():
    cfg   = small_config()
    subs  = initial_subs(cfg)
    group = start_task(GroupState(group_id=0), cfg)
    with pytest.raises(ContractViolation):
        joint_iteration(group, subs, cfg, make_workers(cfg, 0))


@pytest.mark.parametrize("sync", ["minibatch", "epoch"])
@pytest.mark.parametrize("seed", range(5))
def test_unvisited_sub_policy_is_left_bit_identical(seed, sync):
    ppo    = PpoConfig(lr=3e-4, epochs=2, minibatch_size=64, sync=sync)
    cfg    = small_config(K=3, seed=seed, sub_ppo=ppo)
    subs   = initial_subs(cfg)
    master = _master_without(2, 3, seed)
    group  = GroupState(group_id=0, task=TaskSeed("bandits", seed), master=master, phase="joint")

    _, new_subs, applied, report = joint_iteration(group, subs, cfg, make_workers(cfg, 0))

    assert new_subs.nets[2].flat.tobytes() == subs.nets[2].flat.tobytes()
    assert new_subs.adams[2].step == 0 and not new_subs.adams[2].m.any()
    if sync == "epoch":
        assert len(applied) == cfg.sub_ppo.epochs
    else:
        assert len(applied) >= cfg.sub_ppo.epochs
    assert all(2 not in blocks for blocks in applied)
    assert any(not np.array_equal(new_subs.nets[k].flat, subs.nets[k].flat) for k in (0, 1))
    assert report.sub_loss is not None


# ── META LOOP ──────────────────────────────────────────────────────────────────

def test_pure_warmup_run_leaves_phi_untouched():
    cfg = small_config(groups=1, W=3, U=1, meta_iterations=3)
    res = meta_loop(cfg)
    assert res.subs.checksum() == initial_subs(cfg).checksum()
    assert {r.phase for r in res.records} == {"warmup"}


def test_zero_budget_returns_the_initial_phi():
    cfg = small_config(meta_iterations=0)
    res = meta_loop(cfg)
    assert res.records == [] and res.iterations == 0
    assert res.subs.checksum() == initial_subs(cfg).checksum()


def test_one_record_per_group_and_iteration():
    cfg = small_config(groups=3, meta_iterations=4)
    res = meta_loop(cfg)
    assert len(res.records) == 4 * 3
    assert [(r.iteration, r.group) for r in res.records] == [(i, g) for i in range(4) for g in range(3)]
    for r in res.records:
        assert r.timesteps == r.iteration * cfg.D * cfg.total_workers
        assert np.isfinite(r.mean_return)


def test_phases_follow_the_staggered_schedule():
    cfg = small_config(groups=2, W=2, U=1, meta_iterations=6)
    res = meta_loop(cfg)
    # offsets [0, 1]: group 0 is joint at ticks 2 and 5, group 1 at ticks 1 and 4
    joint = {(r.iteration, r.group) for r in res.records if r.phase == "joint"}
    assert joint == {(2, 0), (5, 0), (1, 1), (4, 1)}


def test_parallel_and_sequential_runs_are_bit_identical(monkeypatch):
    monkeypatch.setattr(settings, "MAX_WORKERS", 4)
    cfg = small_config(groups=4, workers_per_group=2, W=1, U=2, meta_iterations=5)
    threaded   = meta_loop(cfg, parallel=True)
    sequential = meta_loop(cfg, parallel=False)
    assert threaded.subs.checksum() == sequential.subs.checksum()
    assert _records(threaded) == _records(sequential)


def test_same_seed_same_run_different_seed_different_run():
    a = meta_loop(small_config(seed=3))
    b = meta_loop(small_config(seed=3))
    c = meta_loop(small_config(seed=4))
    assert a.subs.checksum() == b.subs.checksum()
    assert a.subs.checksum() != c.subs.checksum()


def test_cycle_start_redraws_task_and_theta():
    cfg   = small_config(groups=1, W=2, U=1)
    state = init_state(cfg)
    first = advance_groups(state, cfg)[0]
    for _ in range(3):
        state, _ = tick(state, cfg)
    trained = state.groups[0].master
    again = advance_groups(state, cfg)[0]

    expected = init_master(stream(cfg.seed, GROUP_THETA, 0, 1), 6, cfg.K, cfg.hidden)
    assert again.tasks_seen == 2 and again.position == 0
    np.testing.assert_array_equal(again.master.net.flat, expected.net.flat)
    assert not np.array_equal(again.master.net.flat, trained.net.flat)
    assert again.master.adam.step == 0
    assert first.task != again.task


def test_plateau_patience_stops_early():
    cfg = small_config(meta_iterations=50, plateau_patience=1)
    res = meta_loop(cfg)
    assert res.stopped_early
    assert res.iterations < 50


def test_checkpoints_are_written_on_schedule(tmp_path):
    cfg = small_config(meta_iterations=4, checkpoint_every=2)
    res = meta_loop(cfg, out_dir=tmp_path)
    names = sorted(p.name for p in (tmp_path / CHECKPOINT_DIR).iterdir())
    assert names == ["phi_000002.ckpt", "phi_000004.ckpt", FINAL_CHECKPOINT]
    final = load_checkpoint(tmp_path / CHECKPOINT_DIR / FINAL_CHECKPOINT)
    assert final.header.meta_iteration == 4
    for a, b in zip(final.subs, res.subs.nets):
        assert a.flat.tobytes() == b.flat.tobytes()


def test_metrics_file_is_byte_identical_across_reruns(tmp_path):
    cfg = small_config()
    meta_loop(cfg, out_dir=tmp_path / "a")
    meta_loop(cfg, out_dir=tmp_path / "b")
    assert (tmp_path / "a" / "metrics.jsonl").read_bytes() == (tmp_path / "b" / "metrics.jsonl").read_bytes()
    assert (tmp_path / "a" / "timings.jsonl").exists()


def test_numerical_failure_aborts_with_the_last_good_phi(tmp_path, monkeypatch):
    cfg  = small_config(W=0, U=1, meta_iterations=3)
    real = group_mod.step_gradient
    calls = {"n": 0, "limit": None}

    def counting(*args):
        calls["n"] += 1
        # once the limit is set: the first tick goes through, the second one blows up
        if calls["limit"] is not None and calls["n"] > calls["limit"]:
            raise DiagnosticsError("PPO loss is not finite", {"minibatch": 0})
        return real(*args)

    monkeypatch.setattr(group_mod, "step_gradient", counting)
    first_tick = meta_loop(cfg.model_copy(update={"meta_iterations": 1}), parallel=False)
    calls.update(n=0, limit=calls["n"])

    with pytest.raises(TrainingAborted) as err:
        meta_loop(cfg, out_dir=tmp_path, parallel=False)

    path = tmp_path / CHECKPOINT_DIR / LAST_GOOD_CHECKPOINT
    assert err.value.checkpoint_path == str(path)
    saved = load_checkpoint(path)
    for a, b in zip(saved.subs, first_tick.subs.nets):
        assert a.flat.tobytes() == b.flat.tobytes()


def test_failure_in_the_first_tick_keeps_the_initial_phi(tmp_path, monkeypatch):
    cfg = small_config()

    def boom(*args, **kwargs):
        raise DiagnosticsError("PPO loss is not finite")

    monkeypatch.setattr(group_mod, "step_gradient", boom)
    with pytest.raises(TrainingAborted):
        meta_loop(cfg, out_dir=tmp_path)
    saved = load_checkpoint(tmp_path / CHECKPOINT_DIR / LAST_GOOD_CHECKPOINT)
    assert saved.header.meta_iteration == 0
    for a, b in zip(saved.subs, initial_subs(cfg).nets):
        assert a.flat.tobytes() == b.flat.tobytes()


@pytest.mark.slow
def test_bandits_preset_parallel_phi_trace_matches_sequential(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "MAX_WORKERS", 4)
    cfg = build_config("bandits", overrides=["groups=4", "meta_iterations=400", "checkpoint_every=10"], seed=3)
    meta_loop(cfg, out_dir=tmp_path / "parallel", parallel=True)
    meta_loop(cfg, out_dir=tmp_path / "sequential", parallel=False)

    names = sorted(p.name for p in (tmp_path / "parallel" / CHECKPOINT_DIR).iterdir())
    assert len(names) == 400 // 10 + 1
    for name in names:
        a = (tmp_path / "parallel" / CHECKPOINT_DIR / name).read_bytes()
        b = (tmp_path / "sequential" / CHECKPOINT_DIR / name).read_bytes()
        assert a == b, name
