import numpy as np
import pytest

from src.core.errors import ContractViolation
from src.engine.aggregate import block_means, group_mean, reduce_in_order
from src.nn.network import GradVector


def _g(*values):
    return GradVector(np.array(values, dtype=np.float64))


def test_identical_gradients_average_to_themselves():
    g = _g(0.1, -2.0, 3.5)
    np.testing.assert_array_equal(group_mean([g, g, g, g]).mean(), g.total)


def test_group_mean_of_nothing_is_rejected():
    with pytest.raises(ContractViolation):
        group_mean([None, None])


def test_reduce_skips_missing_and_returns_none_when_empty():
    assert reduce_in_order([None, None]) is None
    total = reduce_in_order([_g(1.0), None, _g(3.0)])
    assert total.count == 2
    np.testing.assert_array_equal(total.mean(), [2.0])


def test_reduction_is_left_to_right():
    a, b, c = _g(1e16), _g(1.0), _g(-1e16)
    # (1e16 + 1) - 1e16 loses the 1 in float64
    assert reduce_in_order([a, b, c]).total[0] == (1e16 + 1.0) - 1e16


def test_blocks_divide_by_their_own_contributors():
    per_worker = [
        {0: _g(2.0), 1: _g(10.0), 2: None},
        {0: _g(4.0), 1: None,     2: None},
        {0: _g(6.0), 1: None,     2: None},
    ]
    blocks = block_means(per_worker, K=3)
    assert set(blocks) == {0, 1}
    np.testing.assert_array_equal(blocks[0].mean(), [4.0])
    # one contributor: its own gradient, not a third of it
    np.testing.assert_array_equal(blocks[1].mean(), [10.0])


def test_no_joint_workers_means_no_blocks():
    assert block_means([], K=2) == {}
