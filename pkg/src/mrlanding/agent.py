"""Greedy deployment of trained tables on one motion axis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import CurriculumGeometry, map_to_discrete
from .double_q import QTablePair, select_action
from .observation import normalize_clip
from .scenario import DerivedHyperparams
from .vehicle import Action, apply_action, pitch_from_index


@dataclass
class Policy:
    """Trained tables for steps 0..n_cs plus what is needed to read observations into them."""

    tables: list[QTablePair]
    geometry: CurriculumGeometry
    hp: DerivedHyperparams
    n_theta: int

    def __post_init__(self):
        if len(self.tables) != len(self.geometry):
            raise ValueError(f"{len(self.tables)} tables for {len(self.geometry)} curriculum steps")
        for t in self.tables:
            if t.n_theta != self.n_theta:
                raise ValueError(f"table built for n_theta={t.n_theta}, policy uses {self.n_theta}")


def mirror_averaged(t: QTablePair) -> QTablePair:
    """Average every value with its reflection under x -> -x.

    The reflection reverses all three discretised channels and the pitch
    index and swaps INC with DEC, so the greedy policy of the result treats
    both directions of travel alike.
    """
    swap = [Action.DEC, Action.INC, Action.NONE]

    def avg(q: np.ndarray) -> np.ndarray:
        return (q + q[::-1, ::-1, ::-1, ::-1][..., swap]) / 2

    return QTablePair(avg(t.q_a), avg(t.q_b), t.visits.copy())


class AxisAgent:
    """One instance per axis; both share the same Policy and differ only in their memory."""

    def __init__(self, policy: Policy):
        self.policy = policy
        self.i_theta = policy.n_theta
        self.last_action: int | None = None
        self.switches = 0
        self.last_step = 0

    @property
    def angle(self) -> float:
        """Attitude setpoint magnitude-signed as a pitch command."""
        p = self.policy
        return pitch_from_index(self.i_theta, p.hp.theta_max, p.n_theta)

    def act(self, p: float, v: float, a: float, rng) -> int:
        pol = self.policy
        hp = pol.hp
        obs = normalize_clip(p, v, a, hp.p_max, hp.v_max, hp.a_max)
        ds = map_to_discrete(obs, pol.geometry, self.i_theta)
        action, _ = select_action(ds.cell, pol.tables[ds.step], 0.0, rng)
        if self.last_action is not None and action != self.last_action:
            self.switches += 1
        self.last_action = action
        self.last_step = ds.step
        self.i_theta = apply_action(self.i_theta, action, pol.n_theta)
        return action
