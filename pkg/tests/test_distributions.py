import numpy as np
import pytest

from src.core.errors import ContractViolation
from src.nn.distributions import entropy, log_softmax, logsumexp, sample_categorical, softmax


def test_softmax_is_stable_for_large_logits():
    p = softmax(np.array([1000.0, 0.0]))
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0)
    assert logsumexp(np.array([1000.0, 1000.0])) == pytest.approx(1000.0 + np.log(2.0))


def test_log_softmax_rows_normalise():
    z = np.random.default_rng(0).standard_normal((5, 4))
    np.testing.assert_allclose(np.exp(log_softmax(z)).sum(axis=1), 1.0, rtol=1e-12)


def test_entropy_of_uniform_is_log_n():
    assert entropy(np.zeros(5)) == pytest.approx(np.log(5.0))


def test_sample_returns_logprob_of_the_drawn_index():
    z = np.array([0.1, 2.0, -1.0])
    idx, logp = sample_categorical(z, np.random.default_rng(0))
    assert logp == pytest.approx(log_softmax(z)[idx])


def test_sample_frequencies_follow_softmax():
    z = np.log(np.array([0.2, 0.5, 0.3]))
    rng = np.random.default_rng(1)
    counts = np.bincount([sample_categorical(z, rng)[0] for _ in range(20000)], minlength=3)
    np.testing.assert_allclose(counts / 20000, [0.2, 0.5, 0.3], atol=0.015)


def test_sample_consumes_exactly_one_uniform():
    a, b = np.random.default_rng(5), np.random.default_rng(5)
    sample_categorical(np.zeros(4), a)
    b.random()
    assert a.random() == b.random()


def test_single_action_is_always_chosen():
    idx, logp = sample_categorical(np.array([3.7]), np.random.default_rng(0))
    assert (idx, logp) == (0, 0.0)


@pytest.mark.parametrize("bad", [np.array([]), np.array([0.0, np.inf]), np.zeros((2, 2))])
def test_bad_logits_are_rejected(bad):
    with pytest.raises(ContractViolation):
        sample_categorical(bad, np.random.default_rng(0))
