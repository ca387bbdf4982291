"""Multiresolution curriculum geometry and the observation -> discrete-state mapping.

Step i of the curriculum covers |p| <= sigma^(2i), |v| <= sigma^i (normalised)
and uses the full acceleration range. Its goal half-widths are the limits of
step i+1 (sigma^2 p_lim, sigma v_lim, sigma_a) unless it is the most recently
added step, in which case they are a third of its own limits
(p_lim/3, v_lim/3, sigma_a/3).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .observation import NormalizedObs1D

LATEST_GOAL_SCALE = 1.0 / 3.0


class DiscretizationRangeError(ValueError):
    """An observation lies outside the outer bound of the selected step."""


@dataclass(frozen=True)
class StepGeometry:
    index: int
    p_lim: float
    v_lim: float
    a_lim: float
    p_goal: float
    v_goal: float
    a_goal: float
    is_latest: bool


class DiscreteState(NamedTuple):
    step: int
    p_d: int
    v_d: int
    a_d: int
    i_theta: int

    @property
    def cell(self) -> tuple[int, int, int, int]:
        """Index of this state inside its step's Q-table."""
        return self.p_d, self.v_d, self.a_d, self.i_theta


def d(x: float, x1: float, x2: float) -> int:
    """Three-way split of [-x2, x2]: 0 on [-x2, -x1), 1 on [-x1, x1], 2 on (x1, x2]."""
    if x < -x2 or x > x2:
        raise DiscretizationRangeError(f"{x} outside [-{x2}, {x2}]")
    if x < -x1:
        return 0
    if x <= x1:
        return 1
    return 2


def geometry_for_step(i: int, sigma: float, sigma_a: float, is_latest: bool) -> StepGeometry:
    if not 0.0 < sigma < 1.0 or not 0.0 < sigma_a < 1.0:
        raise ValueError("contraction factors must lie in (0, 1)")
    p_lim = sigma ** (2 * i)
    v_lim = sigma ** i
    if is_latest:
        return StepGeometry(i, p_lim, v_lim, 1.0, p_lim * LATEST_GOAL_SCALE,
                            v_lim * LATEST_GOAL_SCALE, sigma_a * LATEST_GOAL_SCALE, True)
    # goals coincide with the limits of step i+1
    return StepGeometry(i, p_lim, v_lim, 1.0, sigma ** (2 * (i + 1)), sigma ** (i + 1),
                        sigma_a, False)


@dataclass(frozen=True)
class CurriculumGeometry:
    steps: tuple[StepGeometry, ...]
    sigma: float
    sigma_a: float

    @classmethod
    def build(cls, latest: int, sigma: float = 0.8, sigma_a: float = 0.416) -> "CurriculumGeometry":
        """Geometry of steps 0..latest with step ``latest`` as the most recently added one."""
        steps = tuple(geometry_for_step(i, sigma, sigma_a, i == latest)
                      for i in range(latest + 1))
        return cls(steps, sigma, sigma_a)

    @property
    def latest(self) -> int:
        return len(self.steps) - 1

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, i: int) -> StepGeometry:
        return self.steps[i]


def select_step(p: float, v: float, steps: Sequence[StepGeometry]) -> int:
    """Finest step whose position and velocity limits both contain the observation."""
    ap = abs(p)
    av = abs(v)
    j = 0
    for g in steps[1:]:
        if ap <= g.p_lim and av <= g.v_lim:
            j = g.index
        else:
            break
    return j


def map_to_discrete(obs: NormalizedObs1D, geo: CurriculumGeometry, i_theta: int) -> DiscreteState:
    p, v, a = obs
    j = select_step(p, v, geo.steps)
    g = geo.steps[j]
    return DiscreteState(j, d(p, g.p_goal, g.p_lim), d(v, g.v_goal, g.v_lim),
                         d(a, g.a_goal, g.a_lim), i_theta)


def is_goal(ds: DiscreteState, latest_index: int) -> bool:
    return ds.step == latest_index and ds.p_d == 1 and ds.v_d == 1 and ds.a_d == 1
