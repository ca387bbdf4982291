"""Fixed-timestep flight harness: plant, platform, low-level PIDs and the 100 Hz observer.

Time is kept as an integer physics-step counter; t = k * dt_sim, and the
platform runs on its own clock offset by ``platform_t0``. The low-level controllers and the observer run every ``obs_every`` physics
steps. Agents are scheduled by the caller through ``steps_until``.
"""

from __future__ import annotations

import math
from enum import IntEnum

from .kinematics import TrajectorySpec, platform_state_at
from .observation import (
    AccelFilter,
    NoiseModel,
    RelativeObservation,
    add_noise,
    filtered_accel,
    relative_state,
)
from .scenario import ScenarioSpec
from .vehicle import (
    FlyZone,
    PidState,
    Touchdown,
    UavState,
    attitude_gain,
    in_fly_zone,
    low_level_control,
    step_physics,
    touchdown_check,
)


class SimEvent(IntEnum):
    NONE = 0
    FLYZONE_EXIT = 1
    TOUCHDOWN_SUCCESS = 2
    TOUCHDOWN_MISS = 3


class NonFiniteStateError(RuntimeError):
    """The integrator produced NaN/inf; indicates a misconfigured plant."""


class FlightSim:
    def __init__(self, scenario: ScenarioSpec, trajectory: TrajectorySpec, uav: UavState, *,
                 noise: NoiseModel | None = None, noise_rng=None, detect_touchdown: bool = False,
                 platform_t0: float = 0.0):
        self.scenario = scenario
        self.trajectory = trajectory
        self.uav = uav
        self.zone = FlyZone(scenario.x_max, scenario.y_max, scenario.z_max)
        self.dt = scenario.dt_sim
        self.obs_every = max(1, round(1.0 / (scenario.f_obs * scenario.dt_sim)))
        self.dt_obs = self.obs_every * self.dt
        self.gain = attitude_gain(self.dt, scenario.tau_att)
        self.pid_vz = PidState(*scenario.pid_vz)
        self.pid_yaw = PidState(*scenario.pid_yaw)
        self.filter = AccelFilter(scenario.accel_cutoff, self.dt_obs)
        self.noise = noise if noise is not None and not noise.is_zero else None
        self.noise_rng = noise_rng
        if self.noise is not None and noise_rng is None:
            raise ValueError("noise requires a seeded rng")
        self.detect_touchdown = detect_touchdown
        self.platform_t0 = platform_t0
        self.k = 0
        self.obs: RelativeObservation
        low_level_control(uav, self.pid_vz, self.pid_yaw, self.dt_obs, scenario.g)
        self._observe()

    @property
    def t(self) -> float:
        return self.k * self.dt

    def platform(self):
        return platform_state_at(self.trajectory, self.platform_t0 + self.t)

    def _observe(self, *, update_filter: bool = True) -> None:
        rel = relative_state(self.uav, self.platform())
        if self.noise is not None:
            rel = add_noise(rel, self.noise, self.noise_rng)
        if update_filter:
            a_c = filtered_accel(self.filter, rel.v_c, self.dt_obs)
        else:
            a_c = self.obs.a_c
        self.obs = RelativeObservation(rel.p_c, rel.v_c, a_c, rel.phi_c)

    def steps_until(self, t_target: float) -> int:
        """Index of the first physics step whose time is >= t_target."""
        return max(self.k, math.ceil(t_target / self.dt - 1e-9))

    def _check(self) -> SimEvent:
        uav = self.uav
        if self.detect_touchdown:
            td = touchdown_check(uav, self.platform(), self.scenario.l_mp,
                                 self.scenario.platform_height)
            if td is Touchdown.SUCCESS:
                return SimEvent.TOUCHDOWN_SUCCESS
            if td is Touchdown.MISS:
                return SimEvent.TOUCHDOWN_MISS
        if not in_fly_zone((uav.x, uav.y, uav.z), self.zone):
            if not (math.isfinite(uav.x) and math.isfinite(uav.y) and math.isfinite(uav.z)):
                raise NonFiniteStateError(f"non-finite UAV state at t={self.t:.3f}s: {uav}")
            return SimEvent.FLYZONE_EXIT
        return SimEvent.NONE

    def advance_to(self, k_target: int) -> SimEvent:
        """Step physics until step k_target, stopping early on a terminal event."""
        uav = self.uav
        dt = self.dt
        g = self.scenario.g
        gain = self.gain
        every = self.obs_every
        while self.k < k_target:
            step_physics(uav, dt, g=g, gain=gain)
            self.k += 1
            if self.k % every == 0:
                low_level_control(uav, self.pid_vz, self.pid_yaw, self.dt_obs, g)
                self._observe()
            event = self._check()
            if event is not SimEvent.NONE:
                # terminal observation reflects the state at the event; the
                # filter only advances on the observer's own cadence
                if self.k % every != 0:
                    self._observe(update_filter=False)
                return event
        return SimEvent.NONE
