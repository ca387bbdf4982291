"""Relative observations in the stability frame, acceleration filtering, normalisation and noise."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .kinematics import PlatformState
from .vehicle import UavState

Vec3 = tuple[float, float, float]
ZERO3: Vec3 = (0.0, 0.0, 0.0)


class Axis(str, Enum):
    LONGITUDINAL = "longitudinal"
    LATERAL = "lateral"


@dataclass(frozen=True)
class RelativeObservation:
    p_c: Vec3
    v_c: Vec3
    a_c: Vec3 = ZERO3
    phi_c: Vec3 = ZERO3


class NormalizedObs1D(tuple):
    """(p_x, v_x, a_x), each scaled by its maximum and clipped to [-1, 1]."""

    __slots__ = ()

    def __new__(cls, p: float, v: float, a: float):
        return tuple.__new__(cls, (p, v, a))

    @property
    def p(self) -> float:
        return self[0]

    @property
    def v(self) -> float:
        return self[1]

    @property
    def a(self) -> float:
        return self[2]


@dataclass(frozen=True)
class NoiseModel:
    sigma: tuple[float, float, float, float, float, float] = (0.1, 0.1, 0.1, 0.25, 0.25, 0.25)

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        if len(self.sigma) != 6 or any(s < 0 for s in self.sigma):
            raise ValueError("noise model needs six non-negative standard deviations")

    @property
    def is_zero(self) -> bool:
        return not any(self.sigma)


def _rotate_z(x: float, y: float, angle: float) -> tuple[float, float]:
    c = math.cos(angle)
    s = math.sin(angle)
    return c * x - s * y, s * x + c * y


def relative_state(uav: UavState, platform: PlatformState) -> RelativeObservation:
    """Platform-minus-UAV motion expressed in the UAV's stability frame.

    The platform heading is fixed at 0, so psi_rel = -psi_uav.
    """
    (px, py, pz), (pvx, pvy, pvz), _ = platform
    dx, dy = _rotate_z(px - uav.x, py - uav.y, -uav.psi)
    dvx, dvy = _rotate_z(pvx - uav.vx, pvy - uav.vy, -uav.psi)
    return RelativeObservation(
        p_c=(dx, dy, pz - uav.z),
        v_c=(dvx, dvy, pvz - uav.vz),
        phi_c=(-uav.phi, -uav.theta, -uav.psi),
    )


@dataclass
class AccelFilter:
    """Finite-difference derivative of v_c followed by a first-order Butterworth low-pass.

    The low-pass is the bilinear transform of 1 / (1 + s / (2 pi f_c)),
    prewarped at f_c:

        K  = tan(pi f_c / f_s)
        b0 = b1 = K / (1 + K),  a1 = (K - 1) / (K + 1)
        y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]

    At f_s = 100 Hz and f_c = 0.3 Hz: b0 = 0.0093371, a1 = -0.9813259.
    The first call only stores v_c and returns zero; the second seeds the
    filter state with the first available derivative so no start-up
    transient appears.
    """

    cutoff: float = 0.3
    dt_obs: float = 0.01
    prev_output: Vec3 = ZERO3
    prev_input: Vec3 = ZERO3
    prev_v: Vec3 | None = None
    primed: bool = False
    b0: float = field(init=False)
    a1: float = field(init=False)

    def __post_init__(self):
        k = math.tan(math.pi * self.cutoff * self.dt_obs)
        self.b0 = k / (1.0 + k)
        self.a1 = (k - 1.0) / (k + 1.0)

    def reset(self) -> None:
        self.prev_output = ZERO3
        self.prev_input = ZERO3
        self.prev_v = None
        self.primed = False


def filtered_accel(filt: AccelFilter, v_c: Vec3, dt_obs: float) -> Vec3:
    if filt.prev_v is None:
        filt.prev_v = v_c
        return ZERO3
    pv = filt.prev_v
    inv = 1.0 / dt_obs
    d = ((v_c[0] - pv[0]) * inv, (v_c[1] - pv[1]) * inv, (v_c[2] - pv[2]) * inv)
    filt.prev_v = v_c
    if not filt.primed:
        filt.prev_input = d
        filt.prev_output = d
        filt.primed = True
    b0 = filt.b0
    a1 = filt.a1
    xi = filt.prev_input
    yo = filt.prev_output
    out = (b0 * (d[0] + xi[0]) - a1 * yo[0],
           b0 * (d[1] + xi[1]) - a1 * yo[1],
           b0 * (d[2] + xi[2]) - a1 * yo[2])
    filt.prev_input = d
    filt.prev_output = out
    return out


def _clip1(x: float) -> float:
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def normalize_clip(p: float, v: float, a: float, p_max: float, v_max: float,
                   a_max: float) -> NormalizedObs1D:
    return NormalizedObs1D(_clip1(p / p_max), _clip1(v / v_max), _clip1(a / a_max))


def axis_project(obs: RelativeObservation, axis: Axis) -> tuple[float, float, float]:
    i = 0 if Axis(axis) is Axis.LONGITUDINAL else 1
    return obs.p_c[i], obs.v_c[i], obs.a_c[i]


def add_noise(obs: RelativeObservation, noise: NoiseModel, rng) -> RelativeObservation:
    """Zero-mean Gaussian noise on the three position and three velocity components."""
    if noise.is_zero:
        return obs
    e = rng.normal(0.0, noise.sigma).tolist()
    p, v = obs.p_c, obs.v_c
    return replace(obs,
                   p_c=(p[0] + e[0], p[1] + e[1], p[2] + e[2]),
                   v_c=(v[0] + e[3], v[1] + e[4], v[2] + e[5]))
