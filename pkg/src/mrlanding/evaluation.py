"""Landing-trial batteries: two copies of the trained agent fly x and y together."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from statistics import fmean, pstdev

from .agent import AxisAgent, Policy
from .kinematics import TrajectorySpec, trajectory_period
from .observation import Axis, NoiseModel, axis_project
from .scenario import ScenarioSpec
from .seeding import trial_streams
from .sim import FlightSim, SimEvent
from .vehicle import UavState

TRAJECTORY_COLUMNS = ("t", "uav_x", "uav_y", "uav_z", "platform_x", "platform_y", "theta_ref",
                      "phi_ref", "action_lon", "action_lat", "lat_p", "lat_v", "lat_a")


class TrialOutcome(str, Enum):
    SUCCESS = "success"
    MISS = "miss"
    FLYZONE_EXIT = "flyzone_exit"


@dataclass(frozen=True)
class TrialConfig:
    trajectory: TrajectorySpec
    n_trials: int = 150
    noise: NoiseModel | None = None
    z_init_eval: float = 2.5
    psi_rel: float = math.pi / 4
    seed: int = 0
    vz: float = -0.1
    time_limit: float = 120.0
    random_phase: bool = True
    label: str = ""

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.vz >= 0:
            raise ValueError("descent speed vz must be negative")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")

    @property
    def name(self) -> str:
        return self.label or self.trajectory.label


@dataclass
class TrialResult:
    outcome: TrialOutcome
    duration: float
    jitter: float
    log: list[tuple] | None = None


@dataclass
class TrialStats:
    name: str
    n_trials: int
    successes: int
    misses: int
    flyzone_exits: int
    mean_landing_time: float
    jitter_mean: float
    jitter_std: float
    trajectories: list[list[tuple]] | None = field(default=None, repr=False)

    @property
    def success_rate(self) -> float:
        return self.successes / self.n_trials


def jitter_metric(action_log, duration: float) -> float:
    """Action switches per second."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    switches = sum(1 for a, b in zip(action_log, action_log[1:]) if a != b)
    return switches / duration


def uniform_start(scenario: ScenarioSpec, rng, z: float) -> tuple[float, float, float]:
    return (float(rng.uniform(-scenario.x_max, scenario.x_max)),
            float(rng.uniform(-scenario.y_max, scenario.y_max)), z)


def run_trial(policy: Policy, scenario: ScenarioSpec, config: TrialConfig, trial: int, *,
              start: tuple[float, float, float] | None = None,
              keep_log: bool = False) -> TrialResult:
    """Fly one landing attempt with greedy longitudinal and lateral agents.

    The lateral agent's pitch index is applied as a roll setpoint of
    opposite sign so that each index commands the same body-frame
    acceleration along its own axis. A trial that is still airborne at
    ``time_limit`` counts as a miss.
    """
    rngs = trial_streams(config.seed, 0, trial)
    hp = policy.hp
    if start is None:
        start = uniform_start(scenario, rngs["init"], config.z_init_eval)
    # every trial descends for the same time, so a fixed platform phase would
    # make all touchdowns happen at the same point of the platform's cycle
    period = trajectory_period(config.trajectory)
    t0 = float(rngs["init"].uniform(0.0, period)) if config.random_phase and period else 0.0
    x0, y0, z0 = start
    yaw = -config.psi_rel
    uav = UavState(x=x0, y=y0, z=z0, psi=yaw, psi_ref=yaw, vz_ref=config.vz,
                   tilt_limit=hp.theta_max)
    sim = FlightSim(scenario, config.trajectory, uav, noise=config.noise,
                    noise_rng=rngs["noise"], detect_touchdown=True, platform_t0=t0)
    lon = AxisAgent(policy)
    lat = AxisAgent(policy)
    tie = rngs["tie"]
    k_end = sim.steps_until(config.time_limit)
    dt_ag = hp.dt_agent
    trace = [] if keep_log else None
    n_tick = 0
    while True:
        obs = sim.obs
        lat_obs = axis_project(obs, Axis.LATERAL)
        a_lon = lon.act(*axis_project(obs, Axis.LONGITUDINAL), tie)
        a_lat = lat.act(*lat_obs, tie)
        uav.theta_ref = lon.angle
        uav.phi_ref = -lat.angle
        if trace is not None:
            plat = sim.platform().position
            trace.append((sim.t, uav.x, uav.y, uav.z, plat[0], plat[1], uav.theta_ref,
                          uav.phi_ref, a_lon, a_lat, *lat_obs))
        n_tick += 1
        event = sim.advance_to(min(sim.steps_until(n_tick * dt_ag), k_end))
        if event is not SimEvent.NONE or sim.k >= k_end:
            break
    if event is SimEvent.TOUCHDOWN_SUCCESS:
        outcome = TrialOutcome.SUCCESS
    elif event is SimEvent.FLYZONE_EXIT:
        outcome = TrialOutcome.FLYZONE_EXIT
    else:
        outcome = TrialOutcome.MISS
    duration = sim.t
    jitter = (lon.switches + lat.switches) / duration if duration > 0 else 0.0
    return TrialResult(outcome, duration, jitter, trace)


def aggregate(name: str, results: list[TrialResult], keep_logs: bool = False) -> TrialStats:
    n = len(results)
    succ = [r for r in results if r.outcome is TrialOutcome.SUCCESS]
    misses = sum(1 for r in results if r.outcome is TrialOutcome.MISS)
    exits = sum(1 for r in results if r.outcome is TrialOutcome.FLYZONE_EXIT)
    jit = [r.jitter for r in results]
    return TrialStats(
        name=name, n_trials=n, successes=len(succ), misses=misses, flyzone_exits=exits,
        mean_landing_time=fmean(r.duration for r in succ) if succ else math.nan,
        jitter_mean=fmean(jit), jitter_std=pstdev(jit),
        trajectories=[r.log for r in results] if keep_logs else None)


def _run_chunk(args) -> list[TrialResult]:
    policy, scenario, config, trials, keep_logs = args
    return [run_trial(policy, scenario, config, i, keep_log=keep_logs) for i in trials]


def run_battery(policy: Policy, scenario: ScenarioSpec, configs: list[TrialConfig], *,
                jobs: int = 1, keep_logs: bool = False) -> list[TrialStats]:
    """Run every scenario's trials and aggregate per scenario.

    Trial i draws its start position from (seed, i) only, so scenarios that
    share a seed are flown from the same set of starts.
    """
    out = []
    for cfg in configs:
        trials = list(range(cfg.n_trials))
        if jobs > 1:
            from concurrent.futures import ProcessPoolExecutor
            chunks = [trials[i::jobs] for i in range(jobs)]
            with ProcessPoolExecutor(jobs) as ex:
                parts = list(ex.map(_run_chunk, [(policy, scenario, cfg, c, keep_logs)
                                                 for c in chunks]))
            by_trial = {}
            for c, part in zip(chunks, parts):
                by_trial.update(zip(c, part))
            results = [by_trial[i] for i in trials]
        else:
            results = _run_chunk((policy, scenario, cfg, trials, keep_logs))
        out.append(aggregate(cfg.name, results, keep_logs))
    return out


def _r2(x: float) -> str:
    # round() is half-even, as wanted for reported tables
    return "nan" if math.isnan(x) else f"{round(x, 2):.2f}"


def results_table_text(rows: dict[str, list[TrialStats]]) -> str:
    """Aligned success-rate table: one row per agent/condition, one column per scenario."""
    if not rows:
        return ""
    cols = [s.name for s in next(iter(rows.values()))]
    header = ["", *cols]
    body = [[label, *(_r2(100.0 * s.success_rate) for s in stats)]
            for label, stats in rows.items()]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                       for i, (c, w) in enumerate(zip(r, widths))) for r in [header, *body]]
    return "\n".join(lines) + "\n"


STATS_COLUMNS = ("row", "scenario", "n_trials", "successes", "misses", "flyzone_exits",
                 "success_rate", "mean_landing_time", "jitter_mean", "jitter_std")


def results_table_csv(rows: dict[str, list[TrialStats]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    for label, stats in rows.items():
        for s in stats:
            w.writerow((label, s.name, s.n_trials, s.successes, s.misses, s.flyzone_exits,
                        repr(s.success_rate), repr(s.mean_landing_time), repr(s.jitter_mean),
                        repr(s.jitter_std)))
    return buf.getvalue()


def write_trajectory_csv(path, log: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        w.writerows(log)
