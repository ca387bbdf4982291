"""YAML run configuration: sections, defaults, strict validation and a stable hash."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from .curriculum import ConfigurationError, TrainingConfig
from .double_q import ExplorationSchedule, LearningRateParams
from .evaluation import TrialConfig
from .kinematics import InvalidScenarioError, TrajectoryKind, TrajectorySpec
from .observation import NoiseModel
from .reward import RewardWeights
from .scenario import PRESETS, ScenarioSpec

CONFIG_ENV = "MRLANDING_CONFIG"

SCENARIO_KEYS = ("name", "x_max", "y_max", "z_max", "l_mp", "v_mp", "r_mp", "platform_height",
                 "g", "dt_sim", "f_obs", "tau_att", "accel_cutoff", "pid_vz", "pid_yaw")

DEFAULTS = {
    "training": {
        "seed": 0, "gamma": 0.99, "alpha_min": 0.02949, "omega": 0.51, "t_max": 20.0,
        "z_init": 4.0, "vz": -0.1, "eps_hold_until": 800, "eps_anneal_until": 2000,
        "eps_start": 1.0, "eps_final": 0.01, "eps_later_steps": 0.0,
        "success_window": 100, "success_threshold": 0.96, "dwell_time": 1.0,
        "episode_cap": 10_000, "timeout_is_failure": True, "random_platform_phase": False,
        "psi_rel": 0.0,
    },
    "reward": {"w_p": -100.0, "w_v": -10.0, "w_theta": -1.55, "w_dur": -6.0, "w_suc": 2.6,
               "w_fail": -2.6},
    "discretization": {"sigma": 0.8, "sigma_a": 0.416, "n_theta": 3, "k_a": 3.0, "k_man": 15.0},
    "noise": {"sigma": [0.1, 0.1, 0.1, 0.25, 0.25, 0.25]},
    "evaluation": {"n_trials": 150, "z_init": 2.5, "psi_rel": math.pi / 4, "vz": -0.1,
                   "seed": 0, "time_limit": 120.0, "random_phase": True, "noise_battery": True,
                   "mirror_policy": False, "scenarios": None},
}

# computed quantities that must never be set by hand
DERIVED_KEYS = {"a_mp_max", "omega_mp", "theta_max", "f_ag", "dt_agent", "delta_theta", "t_0",
                "n_cs", "p_max", "v_max", "a_max", "p_lim", "v_lim", "a_lim", "p_goal",
                "v_goal", "a_goal", "geometry"}

SECTIONS = ("scenario", "training", "reward", "discretization", "noise", "evaluation")
HASHED_SECTIONS = ("scenario", "training", "reward", "discretization")


def default_eval_scenarios(scenario: ScenarioSpec) -> list[dict]:
    """Static, a ladder of RPM speeds up to the training speed, and the 8-shape."""
    if scenario.x_max <= 1.0:
        speeds = [0.2, 0.4]
    else:
        speeds = [0.4, 0.8, 1.2, 1.6]
    out = [{"kind": "static"}]
    out += [{"kind": "rpm", "v_mp": v, "r_mp": scenario.r_mp} for v in speeds]
    out.append({"kind": "eight", "v_mp": scenario.v_mp, "r_mp": scenario.r_mp})
    return out


@dataclass
class RunConfig:
    raw: dict
    training: TrainingConfig
    noise: NoiseModel
    eval_settings: dict

    @property
    def config_hash(self) -> bytes:
        return config_hash(self.raw)

    def trial_configs(self, *, noisy: bool = False, n_trials: int | None = None,
                      seed: int | None = None) -> list[TrialConfig]:
        ev = self.eval_settings
        out = []
        for entry in ev["scenarios"]:
            traj = TrajectorySpec(TrajectoryKind(entry["kind"]), float(entry.get("v_mp", 0.0)),
                                  float(entry.get("r_mp", 1.0)))
            out.append(TrialConfig(
                trajectory=traj, n_trials=n_trials or ev["n_trials"],
                noise=self.noise if noisy else None, z_init_eval=ev["z_init"],
                psi_rel=ev["psi_rel"], seed=ev["seed"] if seed is None else seed,
                vz=ev["vz"], time_limit=ev["time_limit"],
                random_phase=bool(ev["random_phase"])))
        return out


def config_hash(raw: dict) -> bytes:
    """sha256 over the training-relevant sections; the training seed is excluded."""
    sub = {k: copy.deepcopy(raw[k]) for k in HASHED_SECTIONS}
    sub["training"].pop("seed", None)
    return hashlib.sha256(canonical_json(sub).encode()).digest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _merge_section(name: str, given, defaults: dict) -> dict:
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigurationError(f"section {name!r} must be a mapping")
    derived = DERIVED_KEYS.intersection(given)
    if derived:
        raise ConfigurationError(f"{name}: {sorted(derived)} are derived and cannot be set")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigurationError(f"{name}: unknown keys {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def resolve(doc: dict | None) -> dict:
    """Fill defaults and reject unknown or derived keys; returns a plain dict."""
    doc = {} if doc is None else doc
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration must be a mapping of sections")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown sections {sorted(unknown)}")
    sc = doc.get("scenario") or {}
    if not isinstance(sc, dict):
        raise ConfigurationError("section 'scenario' must be a mapping")
    sc = dict(sc)
    base_name = sc.pop("preset", None)
    if base_name is None and "name" not in sc:
        raise ConfigurationError("scenario needs either a 'preset' or a full definition")
    if base_name is not None:
        if base_name not in PRESETS:
            raise ConfigurationError(f"unknown preset {base_name!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[base_name]
        base_dict = {k: getattr(base, k) for k in SCENARIO_KEYS}
    else:
        base_dict = {k: None for k in SCENARIO_KEYS}
        base_dict.update({k: getattr(ScenarioSpec, k) for k in SCENARIO_KEYS
                          if hasattr(ScenarioSpec, k)})
    scenario = _merge_section("scenario", sc, base_dict)
    missing = [k for k, v in scenario.items() if v is None]
    if missing:
        raise ConfigurationError(f"scenario: missing keys {missing}")
    scenario["pid_vz"] = [float(x) for x in scenario["pid_vz"]]
    scenario["pid_yaw"] = [float(x) for x in scenario["pid_yaw"]]
    out = {"scenario": scenario}
    for name in SECTIONS[1:]:
        out[name] = _merge_section(name, doc.get(name), DEFAULTS[name])
    return out


def build(raw: dict) -> RunConfig:
    """Turn a resolved configuration into typed objects; raises ConfigurationError."""
    try:
        s = dict(raw["scenario"])
        s["pid_vz"] = tuple(s["pid_vz"])
        s["pid_yaw"] = tuple(s["pid_yaw"])
        scenario = ScenarioSpec(**s)
        t, r, d = raw["training"], raw["reward"], raw["discretization"]
        training = TrainingConfig(
            scenario=scenario,
            weights=RewardWeights(**r),
            lr=LearningRateParams(t["omega"], t["alpha_min"]),
            schedule=ExplorationSchedule(t["eps_hold_until"], t["eps_anneal_until"],
                                         t["eps_start"], t["eps_final"], t["eps_later_steps"]),
            gamma=t["gamma"], t_max=t["t_max"], sigma=d["sigma"], sigma_a=d["sigma_a"],
            n_theta=int(d["n_theta"]), k_a=d["k_a"], k_man=d["k_man"], seed=int(t["seed"]),
            success_window=int(t["success_window"]), success_threshold=t["success_threshold"],
            z_init_train=t["z_init"], vz_train=t["vz"], dwell_time=t["dwell_time"],
            episode_cap=int(t["episode_cap"]),
            timeout_is_failure=bool(t["timeout_is_failure"]),
            random_platform_phase=bool(t["random_platform_phase"]),
            psi_rel_train=float(t["psi_rel"]))
        noise = NoiseModel(tuple(float(x) for x in raw["noise"]["sigma"]))
        ev = dict(raw["evaluation"])
        if ev["scenarios"] is None:
            ev["scenarios"] = default_eval_scenarios(scenario)
        rc = RunConfig(raw, training, noise, ev)
        rc.trial_configs()  # validates the scenario list
    except ConfigurationError:
        raise
    except (InvalidScenarioError, ValueError, TypeError, KeyError) as exc:
        raise ConfigurationError(str(exc)) from exc
    return rc


def load(source: str | os.PathLike | None = None, overrides: dict | None = None) -> RunConfig:
    """Load a YAML file, a preset name, or the file named by $MRLANDING_CONFIG."""
    if source is None:
        source = os.environ.get(CONFIG_ENV)
        if not source:
            raise ConfigurationError(f"no configuration given and ${CONFIG_ENV} is unset")
    src = str(source)
    if src in PRESETS:
        doc = {"scenario": {"preset": src}}
    else:
        path = Path(src)
        try:
            doc = yaml.safe_load(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"invalid YAML in {path}: {exc}") from exc
    doc = copy.deepcopy(doc) if doc else {}
    for section, values in (overrides or {}).items():
        doc.setdefault(section, {})
        doc[section] = {**(doc[section] or {}), **values}
    return build(resolve(doc))


def from_raw(raw: dict) -> RunConfig:
    """Rebuild from a resolved dict (e.g. a manifest's config echo)."""
    return build(resolve(raw))
