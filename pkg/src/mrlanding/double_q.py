"""Tabular Double Q-learning with visit-count learning rates and epsilon-greedy selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_ACTIONS = 3


def table_shape(n_theta: int) -> tuple[int, int, int, int, int]:
    return (3, 3, 3, 2 * n_theta + 1, N_ACTIONS)


@dataclass
class QTablePair:
    q_a: np.ndarray
    q_b: np.ndarray
    visits: np.ndarray

    @classmethod
    def zeros(cls, n_theta: int) -> "QTablePair":
        shape = table_shape(n_theta)
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape, dtype=np.uint64))

    @property
    def n_theta(self) -> int:
        return (self.q_a.shape[3] - 1) // 2

    def copy(self) -> "QTablePair":
        return QTablePair(self.q_a.copy(), self.q_b.copy(), self.visits.copy())

    def greedy_actions(self) -> np.ndarray:
        """Argmax of q_a + q_b for every state (first index on ties)."""
        return np.argmax(self.q_a + self.q_b, axis=-1)

    def equals(self, other: "QTablePair") -> bool:
        return (np.array_equal(self.q_a, other.q_a) and np.array_equal(self.q_b, other.q_b)
                and np.array_equal(self.visits, other.visits))


@dataclass(frozen=True)
class LearningRateParams:
    omega: float = 0.51
    alpha_min: float = 0.02949

    def __post_init__(self):
        if not (0 < self.omega <= 1 and 0 < self.alpha_min <= 1):
            raise ValueError("need 0 < omega <= 1 and 0 < alpha_min <= 1")


@dataclass(frozen=True)
class ExplorationSchedule:
    hold_until: int = 800
    anneal_until: int = 2000
    eps_start: float = 1.0
    eps_final: float = 0.01
    eps_later_steps: float = 0.0


def learning_rate(n_c: int, params: LearningRateParams) -> float:
    return max((n_c + 1.0) ** -params.omega, params.alpha_min)


def epsilon_at(episode: int, schedule: ExplorationSchedule, step: int = 0) -> float:
    """Exploration rate for an episode of the given curriculum step.

    Only step 0 explores: eps_start up to hold_until, then a linear ramp to
    eps_final at anneal_until.
    """
    if step > 0:
        return schedule.eps_later_steps
    if episode < schedule.hold_until:
        return schedule.eps_start
    if episode >= schedule.anneal_until:
        return schedule.eps_final
    frac = (episode - schedule.hold_until) / (schedule.anneal_until - schedule.hold_until)
    return schedule.eps_start + frac * (schedule.eps_final - schedule.eps_start)


def _argmax3(q0: float, q1: float, q2: float) -> int:
    if q0 >= q1:
        return 0 if q0 >= q2 else 2
    return 1 if q1 >= q2 else 2


def greedy_action(q_sum, rng) -> int:
    """Argmax over three action values, ties broken uniformly with ``rng``."""
    q0, q1, q2 = q_sum
    best = max(q0, q1, q2)
    ties = [i for i, q in enumerate((q0, q1, q2)) if q == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.integers(len(ties)))]


def select_action(cell, tables: QTablePair, epsilon: float, rng) -> tuple[int, bool]:
    """Epsilon-greedy action for the table cell (p_d, v_d, a_d, i_theta).

    Returns (action, explored).
    """
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(N_ACTIONS)), True
    qa = tables.q_a[cell]
    qb = tables.q_b[cell]
    return greedy_action((qa[0] + qb[0], qa[1] + qb[1], qa[2] + qb[2]), rng), False


def double_q_update(tables: QTablePair, cell, action: int, reward: float, next_cell,
                    gamma: float, params: LearningRateParams, rng, *,
                    next_tables: QTablePair | None = None, next_scale: float = 1.0) -> float:
    """One Double Q-learning update of Q(cell, action); returns the learning rate used.

    ``next_cell`` is None for a terminal transition. The bootstrap may come
    from another step's tables (``next_tables``), multiplied by ``next_scale``
    to bring it onto this table's reward scale.
    """
    nt = tables if next_tables is None else next_tables
    key = (*cell, action)
    n_c = int(tables.visits[key])
    alpha = learning_rate(n_c, params)
    update_a = rng.random() < 0.5
    if update_a:
        q, nq, nq_other = tables.q_a, nt.q_a, nt.q_b
    else:
        q, nq, nq_other = tables.q_b, nt.q_b, nt.q_a
    if next_cell is None:
        target = reward
    else:
        row = nq[next_cell]
        best = _argmax3(row[0], row[1], row[2])
        target = reward + gamma * next_scale * float(nq_other[(*next_cell, best)])
    old = float(q[key])
    q[key] = old + alpha * (target - old)
    tables.visits[key] = n_c + 1
    return alpha
