"""Reduced-order multi-rotor plant.

Point mass whose horizontal acceleration comes from tilting the thrust
vector (thrust compensated so altitude is unaffected):

    stability frame   a_x = -g tan(theta),   a_y = g tan(phi)
    earth frame       a = R_z(psi) @ (a_x, a_y)

Attitude follows its setpoint through a first-order lag with time constant
tau_att. Vertical velocity and yaw are held by PID loops that run at the
low-level controller rate (see FlightSim); their outputs are stored on the
state as a vertical-acceleration command and a yaw-rate command.

Sign convention: positive pitch accelerates towards -x, positive roll
towards +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .kinematics import PlatformState


class Action(IntEnum):
    INC = 0
    DEC = 1
    NONE = 2


ACTIONS = (Action.INC, Action.DEC, Action.NONE)


class Touchdown(IntEnum):
    AIRBORNE = 0
    SUCCESS = 1
    MISS = 2


@dataclass(slots=True)
class UavState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    phi_ref: float = 0.0
    theta_ref: float = 0.0
    psi_ref: float = 0.0
    vz_ref: float = 0.0
    az_cmd: float = 0.0
    yaw_rate_cmd: float = 0.0
    tilt_limit: float = math.pi / 4

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def velocity(self) -> tuple[float, float, float]:
        return (self.vx, self.vy, self.vz)

    @property
    def attitude(self) -> tuple[float, float, float]:
        return (self.phi, self.theta, self.psi)


@dataclass(frozen=True)
class FlyZone:
    x_max: float
    y_max: float
    z_max: float


@dataclass(slots=True)
class PidState:
    k_p: float
    k_i: float
    k_d: float
    integral: float = 0.0
    prev_error: float | None = None

    def reset(self) -> None:
        self.integral = 0.0
        self.prev_error = None


def pid_step(pid: PidState, error: float, dt: float) -> float:
    """One PID update with trapezoidal integration.

    On the first call after a reset the previous error is taken equal to the
    current one, so the integral grows by error * dt and the derivative is 0.
    """
    prev = error if pid.prev_error is None else pid.prev_error
    pid.integral += 0.5 * (error + prev) * dt
    deriv = (error - prev) / dt
    pid.prev_error = error
    return pid.k_p * error + pid.k_i * pid.integral + pid.k_d * deriv


def attitude_gain(dt_sim: float, tau_att: float) -> float:
    return 1.0 - math.exp(-dt_sim / tau_att)


def step_physics(uav: UavState, dt_sim: float, *, g: float = 9.81, tau_att: float = 0.1,
                 gain: float | None = None) -> UavState:
    """Advance the plant by one fixed step (in place; the state is also returned).

    ``gain`` may carry a precomputed attitude_gain(dt_sim, tau_att).
    """
    k = attitude_gain(dt_sim, tau_att) if gain is None else gain
    lim = uav.tilt_limit
    theta = uav.theta + (uav.theta_ref - uav.theta) * k
    phi = uav.phi + (uav.phi_ref - uav.phi) * k
    if theta > lim:
        theta = lim
    elif theta < -lim:
        theta = -lim
    if phi > lim:
        phi = lim
    elif phi < -lim:
        phi = -lim
    uav.theta = theta
    uav.phi = phi

    ax_s = -g * math.tan(theta)
    ay_s = g * math.tan(phi)
    psi = uav.psi
    if psi == 0.0:
        ax, ay = ax_s, ay_s
    else:
        c = math.cos(psi)
        s = math.sin(psi)
        ax = c * ax_s - s * ay_s
        ay = s * ax_s + c * ay_s

    # semi-implicit Euler: velocity first, then position with the new velocity
    uav.vx += ax * dt_sim
    uav.vy += ay * dt_sim
    uav.vz += uav.az_cmd * dt_sim
    uav.x += uav.vx * dt_sim
    uav.y += uav.vy * dt_sim
    uav.z += uav.vz * dt_sim
    uav.psi += uav.yaw_rate_cmd * dt_sim
    return uav


def low_level_control(uav: UavState, pid_vz: PidState, pid_yaw: PidState, dt: float,
                      g: float = 9.81) -> None:
    """Refresh the vertical-acceleration and yaw-rate commands from their PIDs."""
    az = pid_step(pid_vz, uav.vz_ref - uav.vz, dt)
    limit = 2.0 * g
    uav.az_cmd = max(-limit, min(limit, az))
    err = math.remainder(uav.psi_ref - uav.psi, 2.0 * math.pi)
    uav.yaw_rate_cmd = pid_step(pid_yaw, err, dt)


def apply_action(i_theta: int, action: Action, n_theta: int) -> int:
    if action == Action.INC:
        return min(i_theta + 1, 2 * n_theta)
    if action == Action.DEC:
        return max(i_theta - 1, 0)
    return i_theta


def pitch_from_index(i_theta: int, theta_max: float, n_theta: int) -> float:
    # centre index is exactly level and mirrored indices give exactly opposite angles
    return ((i_theta - n_theta) / n_theta) * theta_max


def touchdown_check(uav: UavState, platform: PlatformState, l_mp: float,
                    platform_height: float) -> Touchdown:
    if uav.z > platform_height:
        return Touchdown.AIRBORNE
    half = 0.5 * l_mp
    px, py, _ = platform.position
    if abs(uav.x - px) <= half and abs(uav.y - py) <= half:
        return Touchdown.SUCCESS
    return Touchdown.MISS


def in_fly_zone(position, zone: FlyZone) -> bool:
    x, y, z = position
    return -zone.x_max <= x <= zone.x_max and -zone.y_max <= y <= zone.y_max \
        and 0.0 <= z <= zone.z_max
