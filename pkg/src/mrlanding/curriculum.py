"""Sequential curriculum training of the longitudinal landing agent.

Each curriculum step i is the same 1-D learning task on a finer
discretization. Step i starts from step i-1's result scaled by the ratio of
the steps' per-step reward ceilings; while step i trains, coarser steps keep
learning whenever the state falls back into their region.
"""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .discretization import CurriculumGeometry, is_goal, map_to_discrete
from .double_q import (
    ExplorationSchedule,
    LearningRateParams,
    QTablePair,
    double_q_update,
    epsilon_at,
    select_action,
)
from .kinematics import trajectory_period
from .observation import Axis, axis_project, normalize_clip
from .reward import RewardWeights, RMax, Terminal, compute_r_max, step_reward
from .scenario import DerivedHyperparams, ScenarioSpec, derive_hyperparams
from .seeding import episode_streams
from .sim import FlightSim, SimEvent
from .vehicle import UavState, apply_action, pitch_from_index

log = logging.getLogger(__name__)


class Outcome(str, Enum):
    SUCCESS = "success"
    FLYZONE_EXIT = "flyzone_exit"
    TIMEOUT = "timeout"


class ConfigurationError(ValueError):
    pass


class TransferInvarianceError(AssertionError):
    """Q-table scaling changed a greedy action; must never happen for a positive ratio."""


@dataclass(frozen=True)
class TrainingConfig:
    scenario: ScenarioSpec
    weights: RewardWeights = RewardWeights()
    lr: LearningRateParams = LearningRateParams()
    schedule: ExplorationSchedule = ExplorationSchedule()
    gamma: float = 0.99
    t_max: float = 20.0
    sigma: float = 0.8
    sigma_a: float = 0.416
    n_theta: int = 3
    k_a: float = 3.0
    k_man: float = 15.0
    seed: int = 0
    success_window: int = 100
    success_threshold: float = 0.96
    z_init_train: float = 4.0
    vz_train: float = -0.1
    dwell_time: float = 1.0
    episode_cap: int = 10_000
    random_platform_phase: bool = False
    timeout_is_failure: bool = True
    psi_rel_train: float = 0.0
    hp: DerivedHyperparams = field(init=False, compare=False)
    rmax: tuple[RMax, ...] = field(init=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.t_max <= 0 or self.episode_cap < 1 or self.success_window < 1:
            raise ConfigurationError("t_max, episode_cap and success_window must be positive")
        if self.vz_train >= 0:
            raise ConfigurationError("training descent speed vz_train must be negative")
        if not 0.0 < self.success_threshold <= 1.0:
            raise ConfigurationError("success_threshold must lie in (0, 1]")
        hp = derive_hyperparams(self.scenario, n_theta=self.n_theta, k_a=self.k_a,
                                k_man=self.k_man, sigma=self.sigma)
        object.__setattr__(self, "hp", hp)
        geo = CurriculumGeometry.build(hp.n_cs, self.sigma, self.sigma_a)
        rmax = tuple(compute_r_max(self.weights, g.v_lim, g.a_lim, hp.dt_agent, hp.delta_theta,
                                   hp.theta_max) for g in geo.steps)
        object.__setattr__(self, "rmax", rmax)

    @property
    def n_steps(self) -> int:
        return self.hp.n_cs + 1

    def geometry(self, latest: int) -> CurriculumGeometry:
        return CurriculumGeometry.build(latest, self.sigma, self.sigma_a)


@dataclass
class GoalDwellTracker:
    """Uninterrupted time spent in the latest curriculum step's region."""

    required: float = 1.0
    time_in_latest_step: float = 0.0
    _inside: bool = False

    def update(self, in_latest: bool, dt: float) -> float:
        if not in_latest:
            self._inside = False
            self.time_in_latest_step = 0.0
        elif self._inside:
            self.time_in_latest_step += dt
        else:
            self._inside = True
            self.time_in_latest_step = 0.0
        return self.time_in_latest_step

    @property
    def satisfied(self) -> bool:
        return self._inside and self.time_in_latest_step >= self.required - 1e-9


@dataclass
class EpisodeResult:
    outcome: Outcome
    accumulated_reward: float
    steps: int
    epsilon: float
    explored: int = 0
    duration: float = 0.0
    log: list | None = None


def scale_q_transfer(q_result: QTablePair, rmax_i: RMax, rmax_next: RMax) -> QTablePair:
    """Seed the next step's tables from a finished step, rescaled to its reward ceiling."""
    if rmax_i.r_max == 0:
        raise ConfigurationError("cannot rescale Q-values from a step with r_max = 0")
    ratio = rmax_next.r_max / rmax_i.r_max
    return QTablePair(q_result.q_a * ratio, q_result.q_b * ratio,
                      np.zeros_like(q_result.visits))


def initial_uav_position(step: int, scenario: ScenarioSpec, rng,
                         z_init: float = 4.0) -> tuple[float, float, float]:
    """Start position: near the zone centre for step 0, uniform over the zone otherwise."""
    if step == 0:
        x = float(rng.normal(0.0, scenario.x_max / 3.0))
        x = min(max(x, -scenario.x_max), scenario.x_max)
        return x, 0.0, z_init
    x = float(rng.uniform(-scenario.x_max, scenario.x_max))
    y = float(rng.uniform(-scenario.y_max, scenario.y_max))
    return x, y, z_init


def run_episode(config: TrainingConfig, step_index: int, tables: list[QTablePair],
                episode: int, *, epsilon: float | None = None, keep_log: bool = False,
                start: tuple[float, float, float] | None = None) -> EpisodeResult:
    """Run and learn from one training episode of curriculum step ``step_index``.

    ``tables`` holds one QTablePair per step 0..step_index and is updated in place.
    """
    sc = config.scenario
    hp = config.hp
    n_theta = config.n_theta
    geo = config.geometry(step_index)
    latest = geo.latest
    rmax = config.rmax
    w = config.weights
    dt_ag = hp.dt_agent
    rngs = episode_streams(config.seed, step_index, episode)
    eps = epsilon_at(episode, config.schedule, step_index) if epsilon is None else epsilon

    x0, y0, z0 = start or initial_uav_position(step_index, sc, rngs["init"], config.z_init_train)
    t0 = 0.0
    if config.random_platform_phase:
        t0 = float(rngs["init"].uniform(0.0, trajectory_period(sc.trajectory)))
    yaw = -config.psi_rel_train
    uav = UavState(x=x0, y=y0, z=z0, psi=yaw, psi_ref=yaw, vz_ref=config.vz_train,
                   tilt_limit=hp.theta_max)
    sim = FlightSim(sc, sc.trajectory, uav, platform_t0=t0)
    k_end = sim.steps_until(config.t_max)
    dwell = GoalDwellTracker(config.dwell_time)

    i_theta = n_theta
    prev = None
    total = 0.0
    explored = 0
    n_tick = 0
    event = SimEvent.NONE
    trace = [] if keep_log else None
    while True:
        p, v, a = axis_project(sim.obs, Axis.LONGITUDINAL)
        obs = normalize_clip(p, v, a, hp.p_max, hp.v_max, hp.a_max)
        ds = map_to_discrete(obs, geo, i_theta)
        dwell.update(ds.step == latest, dt_ag)
        if event is SimEvent.FLYZONE_EXIT:
            terminal, outcome = Terminal.FAILURE, Outcome.FLYZONE_EXIT
        elif dwell.satisfied and is_goal(ds, latest):
            terminal, outcome = Terminal.SUCCESS, Outcome.SUCCESS
        elif sim.k >= k_end:
            terminal = Terminal.FAILURE if config.timeout_is_failure else Terminal.NONE
            outcome = Outcome.TIMEOUT
        else:
            terminal, outcome = Terminal.NONE, None

        if prev is not None:
            p_obs, p_ds, p_action, p_i = prev
            j = ds.step
            rb = step_reward((p_obs[0], p_obs[1], p_i), (obs[0], obs[1], i_theta), geo[j],
                             rmax[j], w, dt_ag, hp.theta_max, n_theta, terminal)
            r = rb.total
            total += r
            jp = p_ds.step
            next_cell = None if terminal is not Terminal.NONE else ds.cell
            double_q_update(tables[jp], p_ds.cell, p_action, r, next_cell, config.gamma,
                            config.lr, rngs["coin"], next_tables=tables[j],
                            next_scale=rmax[jp].r_max / rmax[j].r_max)
            if trace is not None:
                trace.append((sim.t, uav.x, sim.platform().position[0], obs[0], obs[1], obs[2],
                              j, p_action, r))
        if outcome is not None:
            break

        action, was_random = select_action(ds.cell, tables[ds.step], eps, rngs["explore"])
        explored += was_random
        i_theta = apply_action(i_theta, action, n_theta)
        uav.theta_ref = pitch_from_index(i_theta, hp.theta_max, n_theta)
        prev = (obs, ds, action, ds.i_theta)
        n_tick += 1
        event = sim.advance_to(min(sim.steps_until(n_tick * dt_ag), k_end))

    return EpisodeResult(outcome, total, n_tick, eps, explored, sim.t, trace)


@dataclass
class StepStats:
    step: int
    episodes: int
    converged: bool
    wall_clock: float
    final_window_success: float


@dataclass
class EpisodeRecord:
    step: int
    episode: int
    outcome: str
    reward: float
    steps: int
    epsilon: float
    explored: int
    duration: float


@dataclass
class TrainingRun:
    config: TrainingConfig
    tables: list[QTablePair]
    step_stats: list[StepStats]
    episodes: list[EpisodeRecord]
    transfer_checks: int = 0

    @property
    def converged(self) -> bool:
        return (len(self.step_stats) == self.config.n_steps
                and all(s.converged for s in self.step_stats))

    @property
    def total_episodes(self) -> int:
        return len(self.episodes)


def check_transfer(before: QTablePair, after: QTablePair) -> None:
    if not np.array_equal(before.greedy_actions(), after.greedy_actions()):
        n = int(np.count_nonzero(before.greedy_actions() != after.greedy_actions()))
        raise TransferInvarianceError(f"Q-transfer scaling changed {n} greedy actions")


def trailing_success_rate(outcomes, window: int) -> float:
    recent = list(outcomes)[-window:]
    if not recent:
        return 0.0
    return sum(1 for o in recent if o) / len(recent)


def train_curriculum(config: TrainingConfig, *, progress=None) -> TrainingRun:
    """Train curriculum steps 0..n_cs in sequence.

    Each step runs until the latest step's goal was reached in at least
    ``success_threshold`` of the last ``success_window`` episodes (the window
    must be full), or gives up after ``episode_cap`` episodes; a step that
    does not converge ends the run with partial tables.
    """
    run = TrainingRun(config, [], [], [])
    need = math.ceil(config.success_threshold * config.success_window - 1e-9)
    for step in range(config.n_steps):
        if step == 0:
            run.tables.append(QTablePair.zeros(config.n_theta))
        else:
            seeded = scale_q_transfer(run.tables[step - 1], config.rmax[step - 1],
                                      config.rmax[step])
            check_transfer(run.tables[step - 1], seeded)
            run.transfer_checks += 1
            run.tables.append(seeded)
        window: deque[bool] = deque(maxlen=config.success_window)
        t0 = time.perf_counter()
        converged = False
        episode = 0
        while episode < config.episode_cap:
            res = run_episode(config, step, run.tables, episode)
            window.append(res.outcome is Outcome.SUCCESS)
            run.episodes.append(EpisodeRecord(step, episode, res.outcome.value,
                                              res.accumulated_reward, res.steps, res.epsilon,
                                              res.explored, res.duration))
            episode += 1
            if progress is not None:
                progress(step, episode, res, sum(window) / len(window))
            if len(window) == config.success_window and sum(window) >= need:
                converged = True
                break
        stats = StepStats(step, episode, converged, time.perf_counter() - t0,
                          sum(window) / max(1, len(window)))
        run.step_stats.append(stats)
        log.info("curriculum step %d: %d episodes, converged=%s, %.1fs", step, episode,
                 converged, stats.wall_clock)
        if not converged:
            break
    return run
