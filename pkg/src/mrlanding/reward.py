"""Shaped per-step reward with clipping, the per-step reward ceiling r_max and terminal rewards."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .discretization import StepGeometry
from .vehicle import pitch_from_index


class Terminal(str, Enum):
    NONE = "none"
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class RewardWeights:
    w_p: float = -100.0
    w_v: float = -10.0
    w_theta: float = -1.55
    w_dur: float = -6.0
    w_suc: float = 2.6
    w_fail: float = -2.6

    def __post_init__(self):
        if not (self.w_p < 0 and self.w_v < 0 and self.w_theta < 0 and self.w_dur < 0):
            raise ValueError("w_p, w_v, w_theta and w_dur must be negative")
        if not (self.w_suc > 0 and self.w_fail < 0):
            raise ValueError("w_suc must be positive and w_fail negative")


@dataclass(frozen=True)
class RMax:
    r_p_max: float
    r_v_max: float
    r_theta_max: float
    r_dur_max: float

    @property
    def r_max(self) -> float:
        return self.r_p_max + self.r_v_max + self.r_theta_max + self.r_dur_max


@dataclass(frozen=True)
class RewardBreakdown:
    r_p: float
    r_v: float
    r_theta: float
    r_dur: float
    r_term: float

    @property
    def total(self) -> float:
        return self.r_p + self.r_v + self.r_theta + self.r_dur + self.r_term


def compute_r_max(w: RewardWeights, v_lim: float, a_lim: float, dt: float, delta_theta: float,
                  theta_max: float) -> RMax:
    """Largest non-terminal reward attainable in one agent step at the given limits."""
    return RMax(
        r_p_max=abs(w.w_p) * v_lim * dt,
        r_v_max=abs(w.w_v) * a_lim * dt,
        r_theta_max=abs(w.w_theta) * v_lim * delta_theta / theta_max,
        r_dur_max=w.w_dur * v_lim * dt,
    )


def _clip(x: float, bound: float) -> float:
    if x > bound:
        return bound
    if x < -bound:
        return -bound
    return x


def step_reward(prev, cur, step_geo: StepGeometry, rmax: RMax, w: RewardWeights, dt: float,
                theta_max: float, n_theta: int,
                terminal: Terminal = Terminal.NONE) -> RewardBreakdown:
    """Reward for the transition prev -> cur.

    ``prev`` and ``cur`` are (p_x, v_x, i_theta): normalised position and
    velocity plus the pitch-setpoint index in effect.
    """
    p0, v0, i0 = prev
    p1, v1, i1 = cur
    v_lim = step_geo.v_lim
    r_p = _clip(w.w_p * (abs(p1) - abs(p0)), rmax.r_p_max)
    r_v = _clip(w.w_v * (abs(v1) - abs(v0)), rmax.r_v_max)
    th0 = pitch_from_index(i0, theta_max, n_theta)
    th1 = pitch_from_index(i1, theta_max, n_theta)
    r_theta = w.w_theta * (abs(th1) - abs(th0)) / theta_max * v_lim
    r_dur = w.w_dur * v_lim * dt
    if terminal is Terminal.SUCCESS:
        r_term = w.w_suc * rmax.r_max
    elif terminal is Terminal.FAILURE:
        r_term = w.w_fail * rmax.r_max
    else:
        r_term = 0.0
    return RewardBreakdown(r_p, r_v, r_theta, r_dur, r_term)
