"""Named landing scenarios and the hyperparameters derived from their platform motion."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .kinematics import (
    InvalidScenarioError,
    TrajectoryKind,
    TrajectorySpec,
    derive_agent_frequency,
    derive_num_curriculum_steps,
    derive_theta_max,
    max_platform_acceleration,
    worst_case_horizon,
)

G = 9.81


@dataclass(frozen=True)
class ScenarioSpec:
    """Fly zone, platform and flight-environment constants of one training case."""

    name: str
    x_max: float
    y_max: float
    z_max: float
    l_mp: float
    v_mp: float
    r_mp: float
    platform_height: float = 0.3
    g: float = G
    dt_sim: float = 0.002
    f_obs: float = 100.0
    tau_att: float = 0.1
    accel_cutoff: float = 0.3
    pid_vz: tuple[float, float, float] = (5.0, 10.0, 0.0)
    pid_yaw: tuple[float, float, float] = (8.0, 1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "pid_vz", tuple(float(k) for k in self.pid_vz))
        object.__setattr__(self, "pid_yaw", tuple(float(k) for k in self.pid_yaw))
        for key in ("x_max", "y_max", "z_max", "l_mp", "g", "dt_sim", "f_obs", "tau_att",
                    "accel_cutoff"):
            if getattr(self, key) <= 0:
                raise InvalidScenarioError(f"{key} must be > 0, got {getattr(self, key)}")
        if self.dt_sim > 1.0 / self.f_obs:
            raise InvalidScenarioError("physics step must not exceed the observation period")

    @property
    def trajectory(self) -> TrajectorySpec:
        return TrajectorySpec(TrajectoryKind.RPM, self.v_mp, self.r_mp)

    def with_changes(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)


PRESETS: dict[str, ScenarioSpec] = {
    "sim_rpm_0.8": ScenarioSpec("sim_rpm_0.8", 4.5, 4.5, 9.0, l_mp=1.0, v_mp=0.8, r_mp=2.0),
    "sim_rpm_1.2": ScenarioSpec("sim_rpm_1.2", 4.5, 4.5, 9.0, l_mp=1.0, v_mp=1.2, r_mp=2.0),
    "sim_rpm_1.6": ScenarioSpec("sim_rpm_1.6", 4.5, 4.5, 9.0, l_mp=1.0, v_mp=1.6, r_mp=2.0),
    "hardware_rpm_0.4": ScenarioSpec("hardware_rpm_0.4", 1.0, 1.0, 5.0, l_mp=0.5, v_mp=0.4,
                                     r_mp=0.5),
}


def preset(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidScenarioError(
            f"unknown scenario preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class DerivedHyperparams:
    a_mp_max: float
    omega_mp: float
    theta_max: float
    f_ag: float
    dt_agent: float
    t_0: float
    n_cs: int
    delta_theta: float
    p_max: float
    v_max: float
    a_max: float


def derive_hyperparams(scenario: ScenarioSpec, *, n_theta: int = 3, k_a: float = 3.0,
                       k_man: float = 15.0, sigma: float = 0.8) -> DerivedHyperparams:
    """Everything that follows in closed form from the scenario's worst-case platform motion.

    Raises InvalidScenarioError for a static training platform, whose zero
    acceleration leaves the normalisation constants undefined.
    """
    if scenario.v_mp <= 0:
        raise InvalidScenarioError("static training scenario unsupported (v_mp must be > 0)")
    if n_theta < 1:
        raise InvalidScenarioError(f"n_theta must be >= 1, got {n_theta}")
    if k_a <= 0 or k_man < 1:
        raise InvalidScenarioError("k_a must be > 0 and k_man >= 1")
    a_mp_max = max_platform_acceleration(scenario.v_mp, scenario.r_mp)
    omega = scenario.v_mp / scenario.r_mp
    theta_max = derive_theta_max(k_a, a_mp_max, scenario.g)
    f_ag = derive_agent_frequency(n_theta, k_man, omega)
    t_0 = worst_case_horizon(scenario.x_max, a_mp_max)
    n_cs = derive_num_curriculum_steps(sigma, scenario.l_mp, scenario.x_max)
    if f_ag > scenario.f_obs:
        raise InvalidScenarioError(
            f"agent frequency {f_ag:.2f} Hz exceeds the observation rate {scenario.f_obs} Hz")
    return DerivedHyperparams(
        a_mp_max=a_mp_max,
        omega_mp=omega,
        theta_max=theta_max,
        f_ag=f_ag,
        dt_agent=1.0 / f_ag,
        t_0=t_0,
        n_cs=n_cs,
        delta_theta=theta_max / n_theta,
        p_max=scenario.x_max,
        v_max=a_mp_max * t_0,
        a_max=a_mp_max,
    )

