"""Independent reference implementations used by the tests."""

import numpy as np

from mrlanding.discretization import DiscreteState
from mrlanding.double_q import (
    LearningRateParams,
    QTablePair,
    double_q_update,
    select_action,
)


def _d(x, lo, hi):
    assert -hi <= x <= hi
    return 0 if x < -lo else (1 if x <= lo else 2)


def oracle_map(obs, geo, i_theta):
    """Test every step's membership on its own and take the finest match."""
    p, v, a = obs
    members = [g.index for g in geo.steps if abs(p) <= g.p_lim and abs(v) <= g.v_lim]
    j = max(members)
    g = geo[j]
    return DiscreteState(j, _d(p, g.p_goal, g.p_lim), _d(v, g.v_goal, g.v_lim),
                         _d(a, g.a_goal, g.a_lim), i_theta)


def _d_vec(x, lo, hi):
    return np.where(x < -lo, 0, np.where(x <= lo, 1, 2))


def vectorised_oracle(obs, geo):
    """(step, p_d, v_d, a_d) for an (N, 3) array of normalised observations."""
    p, v, a = obs[:, 0], obs[:, 1], obs[:, 2]
    step = np.zeros(len(obs), dtype=int)
    for g in geo.steps:
        inside = (np.abs(p) <= g.p_lim) & (np.abs(v) <= g.v_lim)
        step = np.where(inside, np.maximum(step, g.index), step)
    out = np.empty((len(obs), 4), dtype=int)
    out[:, 0] = step
    for j, g in enumerate(geo.steps):
        m = step == j
        out[m, 1] = _d_vec(p[m], g.p_goal, g.p_lim)
        out[m, 2] = _d_vec(v[m], g.v_goal, g.v_lim)
        out[m, 3] = _d_vec(a[m], g.a_goal, g.a_lim)
    return out


# 4 states x 3 actions, deterministic transitions and rewards
MDP_NEXT = np.array([[1, 2, 0],
                     [2, 0, 3],
                     [3, 1, 0],
                     [0, 3, 2]])
MDP_REWARD = np.array([[0.0, 1.0, -0.5],
                       [0.5, -1.0, 2.0],
                       [1.0, 0.0, -0.2],
                       [-1.0, 0.3, 1.5]])


def value_iteration(gamma=0.9, sweeps=50):
    q = np.zeros(MDP_REWARD.shape)
    for _ in range(sweeps):
        q = MDP_REWARD + gamma * q.max(axis=1)[MDP_NEXT]
    return q


def run_double_q_on_mdp(seed, updates=100_000, gamma=0.9, epsilon=0.3):
    rng = np.random.default_rng(seed)
    tables = QTablePair(np.zeros((4, 3)), np.zeros((4, 3)), np.zeros((4, 3), dtype=np.uint64))
    params = LearningRateParams()
    s = 0
    for _ in range(updates):
        a, _ = select_action((s,), tables, epsilon, rng)
        s2 = int(MDP_NEXT[s, a])
        double_q_update(tables, (s,), a, float(MDP_REWARD[s, a]), (s2,), gamma, params, rng)
        s = s2
    return tables
