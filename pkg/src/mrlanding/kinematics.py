"""Closed-form landing-platform trajectories and the hyperparameters derived from them.

The platform only translates in the horizontal plane. Three trajectory
variants are supported:

    static   x = y = 0
    rpm      x(t) = r_mp * sin(w t),  y = 0            (rectilinear periodic movement)
    eight    (x, y) = r_mp * (sin(w t), sin(0.5 w t))

with w = v_mp / r_mp. The rpm closed form starts at the origin with
velocity v_mp; its acceleration is -(v_mp^2 / r_mp) sin(w t) at all times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple


class InvalidScenarioError(ValueError):
    """Raised when scenario geometry or kinematics make the derivations undefined."""


class TrajectoryKind(str, Enum):
    STATIC = "static"
    RPM = "rpm"
    EIGHT = "eight"


@dataclass(frozen=True)
class TrajectorySpec:
    kind: TrajectoryKind = TrajectoryKind.RPM
    v_mp: float = 0.0
    r_mp: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TrajectoryKind(self.kind))
        if self.v_mp < 0:
            raise InvalidScenarioError(f"platform speed must be >= 0, got {self.v_mp}")
        if self.kind is not TrajectoryKind.STATIC and self.r_mp <= 0:
            raise InvalidScenarioError(f"trajectory amplitude must be > 0, got {self.r_mp}")

    @property
    def omega(self) -> float:
        if self.kind is TrajectoryKind.STATIC:
            return 0.0
        return self.v_mp / self.r_mp

    @property
    def label(self) -> str:
        if self.kind is TrajectoryKind.STATIC or self.v_mp == 0:
            return "Static"
        if self.kind is TrajectoryKind.RPM:
            return f"RPM {self.v_mp:g}"
        return "8-shape"


class PlatformState(NamedTuple):
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    acceleration: tuple[float, float, float]


def platform_xy(spec: TrajectorySpec, t: float) -> tuple[float, float, float, float, float, float]:
    """Horizontal (x, y, vx, vy, ax, ay) of the platform at time t.

    Hot-path variant of platform_state_at used inside the simulation loop.
    """
    kind = spec.kind
    if kind is TrajectoryKind.STATIC or spec.v_mp == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    r = spec.r_mp
    v = spec.v_mp
    w = v / r
    s = math.sin(w * t)
    c = math.cos(w * t)
    acc = v * v / r
    if kind is TrajectoryKind.RPM:
        return r * s, 0.0, v * c, 0.0, -acc * s, 0.0
    s2 = math.sin(0.5 * w * t)
    c2 = math.cos(0.5 * w * t)
    return r * s, r * s2, v * c, 0.5 * v * c2, -acc * s, -0.25 * acc * s2


def trajectory_period(spec: TrajectorySpec) -> float:
    """Time after which the platform motion repeats (0 for a static platform)."""
    if spec.kind is TrajectoryKind.STATIC or spec.v_mp == 0.0:
        return 0.0
    base = 2.0 * math.pi / spec.omega
    return base if spec.kind is TrajectoryKind.RPM else 2.0 * base


def platform_state_at(spec: TrajectorySpec, t: float) -> PlatformState:
    x, y, vx, vy, ax, ay = platform_xy(spec, t)
    return PlatformState((x, y, 0.0), (vx, vy, 0.0), (ax, ay, 0.0))


def max_platform_acceleration(v_mp: float, r_mp: float) -> float:
    if r_mp <= 0:
        raise InvalidScenarioError(f"trajectory amplitude must be > 0, got {r_mp}")
    return v_mp * v_mp / r_mp


def derive_theta_max(k_a: float, a_mp_max: float, g: float) -> float:
    """Pitch limit that lets thrust tilt produce k_a times the platform's peak acceleration."""
    return math.atan(k_a * a_mp_max / g)


def derive_agent_frequency(n_theta: int, k_man: float, omega_mp: float) -> float:
    """Agent rate at which sweeping the whole pitch range is k_man times faster than one platform period.

    Sweeping -theta_max -> +theta_max -> -theta_max takes 4 * n_theta agent steps.
    """
    return 2.0 * n_theta * k_man * omega_mp / math.pi


def derive_num_curriculum_steps(sigma: float, l_mp: float, x_max: float) -> int:
    """Smallest n with sigma^(2(n+1)) * x_max <= l_mp / 2."""
    if not 0.0 < sigma < 1.0:
        raise InvalidScenarioError(f"contraction factor must lie in (0, 1), got {sigma}")
    half = 0.5 * l_mp
    if half <= 0 or half >= x_max:
        raise InvalidScenarioError(
            f"platform half-width {half} must lie in (0, x_max={x_max})")
    n = 0
    while sigma ** (2 * (n + 1)) * x_max > half:
        n += 1
    return n


def worst_case_horizon(x_max: float, a_mp_max: float) -> float:
    """Time for a platform accelerating at a_mp_max from rest to cover x_max."""
    if a_mp_max <= 0:
        raise InvalidScenarioError(
            "worst-case horizon undefined for a static platform (a_mp_max = 0)")
    return math.sqrt(2.0 * x_max / a_mp_max)
