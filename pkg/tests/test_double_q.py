import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrlanding.double_q import (
    ExplorationSchedule,
    LearningRateParams,
    QTablePair,
    double_q_update,
    epsilon_at,
    learning_rate,
    select_action,
    table_shape,
)
from oracles import run_double_q_on_mdp, value_iteration

P = LearningRateParams()
S = ExplorationSchedule()
CELL = (1, 1, 1, 3)


def test_learning_rate():
    assert learning_rate(0, P) == 1.0
    assert learning_rate(99, P) == pytest.approx(0.09550, abs=1e-5)
    assert learning_rate(10**6, P) == 0.02949


def test_epsilon_schedule():
    assert epsilon_at(0, S) == 1.0
    assert epsilon_at(799, S) == 1.0
    assert epsilon_at(1400, S) == pytest.approx(0.505)
    assert epsilon_at(2000, S) == 0.01
    assert epsilon_at(50_000, S) == 0.01
    assert epsilon_at(0, S, step=2) == 0.0


def test_epsilon_is_non_increasing():
    eps = [epsilon_at(e, S) for e in range(0, 3000, 7)]
    assert all(a >= b for a, b in zip(eps, eps[1:]))
    assert all(0 <= e <= 1 for e in eps)


def test_table_shape():
    assert table_shape(3) == (3, 3, 3, 7, 3)
    t = QTablePair.zeros(3)
    assert t.n_theta == 3 and t.visits.dtype == np.uint64


def test_unique_argmax_is_selected():
    t = QTablePair.zeros(3)
    t.q_a[CELL] = (1.0, 0.0, 0.0)
    rng = np.random.default_rng(0)
    assert all(select_action(CELL, t, 0.0, rng) == (0, False) for _ in range(100))


def test_ties_are_broken_uniformly():
    t = QTablePair.zeros(3)
    rng = np.random.default_rng(1)
    counts = np.bincount([select_action(CELL, t, 0.0, rng)[0] for _ in range(100_000)],
                         minlength=3)
    assert np.allclose(counts / 100_000, 1 / 3, atol=0.02 / 3)


def test_full_exploration_is_uniform():
    t = QTablePair.zeros(3)
    t.q_a[CELL] = (100.0, 0.0, 0.0)
    rng = np.random.default_rng(2)
    draws = [select_action(CELL, t, 1.0, rng) for _ in range(30_000)]
    assert all(explored for _, explored in draws)
    counts = np.bincount([a for a, _ in draws], minlength=3)
    assert np.allclose(counts / 30_000, 1 / 3, atol=0.015)


def test_terminal_update_with_unit_rate():
    t = QTablePair.zeros(3)
    alpha = double_q_update(t, CELL, 2, 13.141, None, 0.99, P, np.random.default_rng(0))
    assert alpha == 1.0
    assert t.q_a[(*CELL, 2)] + t.q_b[(*CELL, 2)] == pytest.approx(13.141)
    assert t.visits[(*CELL, 2)] == 1


class Coin:
    """Stand-in rng whose uniform draw is fixed, to pin the A/B choice."""

    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


def test_zero_discount_is_running_average():
    t = QTablePair.zeros(3)
    rewards = np.random.default_rng(9).normal(size=200)
    for r in rewards:
        double_q_update(t, CELL, 0, float(r), CELL, 0.0, LearningRateParams(1.0, 1e-9), Coin(0.0))
    assert t.q_a[(*CELL, 0)] == pytest.approx(rewards.mean(), abs=1e-12)
    assert t.q_b[(*CELL, 0)] == 0.0
    assert t.visits[(*CELL, 0)] == 200


def test_bootstrap_uses_other_table_at_own_argmax():
    t = QTablePair.zeros(1)
    nxt = (0, 0, 0, 0)
    t.q_a[nxt] = (5.0, 1.0, 0.0)
    t.q_b[nxt] = (2.0, 7.0, 0.0)
    double_q_update(t, CELL[:3] + (1,), 0, 0.0, nxt, 0.5, P, Coin(0.0))
    assert t.q_a[(1, 1, 1, 1, 0)] == pytest.approx(0.5 * 2.0)
    double_q_update(t, CELL[:3] + (2,), 0, 0.0, nxt, 0.5, P, Coin(0.9))
    assert t.q_b[(1, 1, 1, 2, 0)] == pytest.approx(0.5 * 1.0)


def test_cross_table_bootstrap_is_scaled():
    t, other = QTablePair.zeros(1), QTablePair.zeros(1)
    nxt = (0, 0, 0, 0)
    other.q_a[nxt] = (4.0, 0.0, 0.0)
    other.q_b[nxt] = (4.0, 0.0, 0.0)
    double_q_update(t, (1, 1, 1, 1), 0, 0.0, nxt, 0.5, P, np.random.default_rng(0),
                    next_tables=other, next_scale=0.25)
    assert t.q_a[1, 1, 1, 1, 0] + t.q_b[1, 1, 1, 1, 0] == pytest.approx(0.5 * 4.0 * 0.25)


def test_visit_counts_conserve():
    t = run_double_q_on_mdp(0, updates=5000)
    assert int(t.visits.sum()) == 5000


def test_converges_to_value_iteration():
    q_star = value_iteration()
    t = run_double_q_on_mdp(3)
    assert np.abs((t.q_a + t.q_b) / 2 - q_star).max() < 0.05 * np.abs(q_star).max()


def test_updates_are_deterministic():
    a, b = run_double_q_on_mdp(7, 3000), run_double_q_on_mdp(7, 3000)
    assert a.equals(b)


@given(rewards=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60),
       gamma=st.floats(0.0, 0.999))
def test_update_is_bounded(rewards, gamma):
    t = QTablePair.zeros(1)
    rng = np.random.default_rng(0)
    for k, r in enumerate(rewards):
        cell = (k % 3, 0, 0, 0)
        nxt = ((k + 1) % 3, 0, 0, 0)
        action = k % 3
        qmax = max(np.abs(t.q_a).max(), np.abs(t.q_b).max())
        before = (t.q_a.copy(), t.q_b.copy())
        alpha = double_q_update(t, cell, action, r, nxt, gamma, P, rng)
        delta = max(np.abs(t.q_a - before[0]).max(), np.abs(t.q_b - before[1]).max())
        assert delta <= alpha * (abs(r) + gamma * qmax + qmax) + 1e-9
    assert np.all(np.isfinite(t.q_a)) and np.all(np.isfinite(t.q_b))


def test_parameter_validation():
    with pytest.raises(ValueError):
        LearningRateParams(0.0, 0.1)
    with pytest.raises(ValueError):
        LearningRateParams(0.5, 1.5)
