import pytest
from loguru import logger

from src.core.errors import ContractViolation
from src.engine.schedule import cycle_position, joint_groups, phase_at, schedule_offsets


@pytest.fixture
def warnings():
    seen = []
    sink = logger.add(lambda m: seen.append(m.record["message"]), level="WARNING")
    yield seen
    logger.remove(sink)


def test_ten_groups_nine_plus_one_have_exactly_one_joint_group_per_tick():
    offsets = schedule_offsets(10, 9, 1)
    assert offsets == list(range(10))
    for tick in range(30):
        assert len(joint_groups(tick, offsets, 9, 1)) == 1


def test_two_groups_twenty_plus_thirty():
    offsets = schedule_offsets(2, 20, 30)
    assert offsets == [0, 25]
    for tick in range(100):
        assert len(joint_groups(tick, offsets, 20, 30)) >= 1


def test_single_group_starts_at_zero():
    assert schedule_offsets(1, 9, 1) == [0]


def test_position_and_phase():
    assert cycle_position(12, 3, 9, 1) == 5
    assert phase_at(0, 0, 9, 1) == "warmup"
    assert phase_at(9, 0, 9, 1) == "joint"
    assert phase_at(10, 0, 9, 1) == "warmup"
    # no warmup at all
    assert phase_at(0, 0, 0, 5) == "joint"


def test_starving_schedule_is_warned_about(warnings):
    schedule_offsets(2, 9, 1)
    assert any("starve" in m for m in warnings)


def test_covering_schedule_is_quiet(warnings):
    schedule_offsets(10, 9, 1)
    assert not warnings


def test_zero_groups_is_rejected():
    with pytest.raises(ContractViolation):
        schedule_offsets(0, 9, 1)
