import json

import numpy as np
import pandas as pd
import pytest

from src.cli.common import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME
from src.core.errors import DiagnosticsError
from src.engine import group as group_mod
from src.hierarchy.policies import init_sub_policies
from src.main import main
from src.nn.checkpoint import save_checkpoint

FAST = ["--set", "D=100", "--set", "groups=2", "--set", "hidden=16"]


def _train(out, *extra):
    return main(["train", "--preset", "bandits", *FAST, "--budget", "2", "--out", str(out), *extra])


def _random_ckpt(path, env, K, obs_dim, n_actions):
    subs = init_sub_policies(np.random.default_rng(0), K, obs_dim, n_actions, hidden=8)
    return save_checkpoint(path, env, subs.nets)


def test_train_writes_the_run_directory(tmp_path):
    assert _train(tmp_path) == EXIT_OK
    snapshot = json.loads((tmp_path / "config.json").read_text())
    assert snapshot["meta_iterations"] == 2
    assert snapshot["label"] == "bandits[D=100,groups=2,hidden=16]"
    assert len((tmp_path / "metrics.jsonl").read_text().splitlines()) == 2 * 2
    assert (tmp_path / "checkpoints" / "phi_final.ckpt").exists()


def test_rerun_from_the_snapshot_is_byte_identical(tmp_path):
    assert _train(tmp_path / "a") == EXIT_OK
    again = main(["train", "--config", str(tmp_path / "a" / "config.json"), "--out", str(tmp_path / "b")])
    assert again == EXIT_OK
    assert (tmp_path / "a" / "metrics.jsonl").read_bytes() == (tmp_path / "b" / "metrics.jsonl").read_bytes()


def test_dump_trajectories(tmp_path):
    assert _train(tmp_path, "--dump-trajectories") == EXIT_OK
    lines = (tmp_path / "trajectories.jsonl").read_text().splitlines()
    # 2 iterations × 2 groups × 1 worker × D steps
    assert len(lines) == 2 * 2 * 100
    first = json.loads(lines[0])
    assert set(first) >= {"iteration", "group", "worker", "t", "obs", "action", "reward", "done", "k"}


def test_unknown_preset_exits_one(tmp_path):
    assert main(["train", "--preset", "atari", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_invalid_override_exits_one(tmp_path):
    assert main(["train", "--preset", "bandits", "--set", "U=0", "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.parametrize("command", [
    ["train", "--preset", "bandits"],
    ["baseline", "scratch", "--preset", "bandits"],
    ["baseline", "shared", "--preset", "bandits"],
])
def test_negative_budget_exits_one(tmp_path, command):
    assert main([*command, "--budget", "-1", "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert not (tmp_path / "out" / "config.json").exists()


def test_negative_adapt_budget_exits_one(tmp_path):
    ckpt = _random_ckpt(tmp_path / "phi.ckpt", "bandits", 2, 6, 5)
    code = main(["adapt", "--preset", "bandits", "--checkpoint", str(ckpt), "--budget", "-3",
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as err:
        main(["train", "--budget", "many"])
    assert err.value.code == EXIT_CONFIG


def test_missing_checkpoint_exits_one(tmp_path):
    code = main(["adapt", "--preset", "bandits", "--checkpoint", str(tmp_path / "nope.ckpt"),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG


def test_checkpoint_that_does_not_fit_the_target_exits_one(tmp_path):
    ckpt = _random_ckpt(tmp_path / "phi.ckpt", "fourrooms", 4, 338, 4)
    code = main(["adapt", "--preset", "obstacle-transfer", "--checkpoint", str(ckpt),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG


def test_numerical_abort_exits_two(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise DiagnosticsError("PPO loss is not finite")

    monkeypatch.setattr(group_mod, "step_gradient", boom)
    assert _train(tmp_path) == EXIT_RUNTIME
    assert (tmp_path / "checkpoints" / "phi_last_good.ckpt").exists()


def test_adapt_writes_metrics_and_curve(tmp_path):
    ckpt = _random_ckpt(tmp_path / "phi.ckpt", "bandits", 2, 6, 5)
    code = main(["adapt", "--preset", "bandits", *FAST, "--set", "eval_tasks=2",
                 "--checkpoint", str(ckpt), "--budget", "1", "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    assert len((tmp_path / "out" / "metrics.jsonl").read_text().splitlines()) == 2 * 2
    curve = pd.read_csv(tmp_path / "out" / "curve.csv")
    assert list(curve["timesteps"]) == [0, 100]


def test_baseline_scratch(tmp_path):
    code = main(["baseline", "scratch", "--preset", "bandits", *FAST, "--set", "eval_tasks=1",
                 "--budget", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert len((tmp_path / "metrics.jsonl").read_text().splitlines()) == 2


def test_inspect_single_sub_policy(tmp_path):
    ckpt = _random_ckpt(tmp_path / "phi.ckpt", "bandits", 1, 6, 5)
    assert main(["inspect", "--checkpoint", str(ckpt), "--out", str(tmp_path / "out")]) == EXIT_OK
    report = json.loads((tmp_path / "out" / "specialization.json").read_text())
    assert report["K"] == 1 and len(report["sub_policies"]) == 1
    assert report["distinct"] is False
    arrows = pd.read_csv(tmp_path / "out" / "arrows.csv")
    assert len(arrows) == 11 * 11


def test_export_merges_runs(tmp_path):
    assert _train(tmp_path / "a") == EXIT_OK
    out = tmp_path / "curves.csv"
    assert main(["export", str(tmp_path / "a"), "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["label", "timesteps", "mean_return", "stderr", "seeds"]
    assert (frame["stderr"] == 0.0).all()
