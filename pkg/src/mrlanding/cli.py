"""Command-line entry point: derive, train, eval, inspect.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure,
3 training did not converge within the episode cap.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, bundle as qbundle, config as cfgmod
from .agent import Policy, mirror_averaged
from .curriculum import ConfigurationError, TrainingRun, train_curriculum
from .evaluation import (
    TrialConfig,
    results_table_csv,
    results_table_text,
    run_battery,
    run_trial,
    write_trajectory_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_NOT_CONVERGED = 0, 1, 2, 3
BUNDLE_NAME = "bundle.qbn"
MANIFEST_NAME = "manifest.json"
EPISODES_NAME = "episodes.csv"
EPISODE_COLUMNS = ("step", "episode", "outcome", "reward", "steps", "epsilon", "explored",
                   "duration")

log = logging.getLogger("mrlanding")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def fmt2(x: float) -> str:
    return f"{round(x, 2):.2f}"


def derived_report(rc: cfgmod.RunConfig) -> dict:
    tc = rc.training
    hp = tc.hp
    geo = tc.geometry(hp.n_cs)
    return {
        "scenario": tc.scenario.name,
        "a_mp_max": hp.a_mp_max,
        "omega_mp": hp.omega_mp,
        "theta_max": hp.theta_max,
        "f_ag": hp.f_ag,
        "dt_agent": hp.dt_agent,
        "t_0": hp.t_0,
        "n_cs": hp.n_cs,
        "delta_theta": hp.delta_theta,
        "p_max": hp.p_max,
        "v_max": hp.v_max,
        "a_max": hp.a_max,
        "r_max": [r.r_max for r in tc.rmax],
        "geometry": [asdict(g) for g in geo.steps],
    }


def cmd_derive(args) -> int:
    rc = _load_config(args)
    rep = derived_report(rc)
    if args.kv:
        for k, v in rep.items():
            if k == "geometry":
                for g in v:
                    for gk, gv in g.items():
                        if gk != "index":
                            print(f"step{g['index']}.{gk}={gv!r}")
            elif k == "r_max":
                for i, r in enumerate(v):
                    print(f"step{i}.r_max={r!r}")
            else:
                print(f"{k}={v!r}" if not isinstance(v, str) else f"{k}={v}")
        return EXIT_OK
    units = {"a_mp_max": "m/s^2", "omega_mp": "rad/s", "theta_max": "rad", "f_ag": "Hz",
             "dt_agent": "s", "t_0": "s", "delta_theta": "rad", "p_max": "m", "v_max": "m/s",
             "a_max": "m/s^2"}
    print(f"scenario  {rep['scenario']}")
    for k, unit in units.items():
        print(f"{k:<12}{fmt2(rep[k]):>8}  {unit}")
    print(f"{'n_cs':<12}{rep['n_cs']:>8}")
    print()
    cols = ("step", "p_lim", "v_lim", "a_lim", "p_goal", "v_goal", "a_goal", "r_max")
    print("".join(f"{c:>8}" for c in cols))
    for g, r in zip(rep["geometry"], rep["r_max"]):
        vals = [g["p_lim"], g["v_lim"], g["a_lim"], g["p_goal"], g["v_goal"], g["a_goal"], r]
        print(f"{g['index']:>8}" + "".join(f"{fmt2(v):>8}" for v in vals))
    return EXIT_OK


def _load_config(args, overrides: dict | None = None) -> cfgmod.RunConfig:
    return cfgmod.load(getattr(args, "config", None), overrides)


def make_bundle(run: TrainingRun, rc: cfgmod.RunConfig) -> qbundle.QBundle:
    tc = rc.training
    geo = tc.geometry(len(run.tables) - 1)
    return qbundle.QBundle(rc.config_hash, tc.hp.n_cs, tc.n_theta, run.tables, list(geo.steps),
                           converged=run.converged)


def write_episode_log(path: Path, run: TrainingRun) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPISODE_COLUMNS)
        for e in run.episodes:
            w.writerow((e.step, e.episode, e.outcome, repr(e.reward), e.steps, repr(e.epsilon),
                        e.explored, repr(e.duration)))


def train_one(raw: dict, seed: int, out: Path) -> dict:
    """Train one seed and write bundle, episode log and manifest into ``out``."""
    raw = json.loads(json.dumps(raw))
    raw["training"]["seed"] = seed
    rc = cfgmod.from_raw(raw)
    out.mkdir(parents=True, exist_ok=True)
    run = train_curriculum(rc.training, progress=_progress)
    data = qbundle.save(make_bundle(run, rc), out / BUNDLE_NAME)
    write_episode_log(out / EPISODES_NAME, run)
    manifest = {
        "format": "mrlanding-run/1",
        "package_version": __version__,
        "seed": seed,
        "status": "converged" if run.converged else "not_converged",
        "config": rc.raw,
        "config_hash": rc.config_hash.hex(),
        "derived": derived_report(rc),
        "steps": [{"step": s.step, "episodes": s.episodes, "converged": s.converged,
                   "wall_clock_s": s.wall_clock, "final_window_success": s.final_window_success}
                  for s in run.step_stats],
        "total_episodes": run.total_episodes,
        "transfer_checks": run.transfer_checks,
        "bundle": BUNDLE_NAME,
        "bundle_sha256": hashlib.sha256(data).hexdigest(),
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _progress(step, episode, res, rate):
    if episode % 500 == 0:
        log.info("step %d episode %d: %s, trailing success %.2f", step, episode,
                 res.outcome.value, rate)


def _train_worker(job):
    raw, seed, out = job
    return train_one(raw, seed, Path(out))


def cmd_train(args) -> int:
    if args.manifest:
        try:
            man = json.loads(Path(args.manifest).read_text())
            raw, seeds = man["config"], [int(man["seed"])]
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot read manifest {args.manifest}: {exc}", EXIT_CONFIG)
        rc = cfgmod.from_raw(raw)
    else:
        rc = _load_config(args)
        seeds = args.seeds if args.seeds else [rc.training.seed if args.seed is None
                                                else args.seed]
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {out} is not writable: {exc}", EXIT_RUNTIME)
    jobs = [(rc.raw, s, str(out if len(seeds) == 1 else out / f"seed_{s}")) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(min(args.jobs, len(jobs))) as ex:
            manifests = list(ex.map(_train_worker, jobs))
    else:
        manifests = [_train_worker(j) for j in jobs]
    code = EXIT_OK
    for man, (_, seed, path) in zip(manifests, jobs):
        steps = ", ".join(f"{s['step']}:{s['episodes']}" for s in man["steps"])
        print(f"seed {seed}: {man['status']} after {man['total_episodes']} episodes "
              f"(per step {steps}) -> {path}")
        if man["status"] != "converged":
            last = man["steps"][-1]
            print(f"seed {seed}: step {last['step']} did not reach the success criterion within "
                  f"{last['episodes']} episodes (trailing success "
                  f"{last['final_window_success']:.2f}); partial bundle written", file=sys.stderr)
            code = EXIT_NOT_CONVERGED
    return code


def _load_bundle(path) -> qbundle.QBundle:
    try:
        return qbundle.from_bytes(Path(path).read_bytes())
    except OSError as exc:
        raise CliError(f"cannot read bundle {path}: {exc}", EXIT_RUNTIME)
    except qbundle.BundleFormatError as exc:
        raise CliError(f"invalid bundle {path}: {exc}", EXIT_RUNTIME)


def policy_for(b: qbundle.QBundle, rc: cfgmod.RunConfig) -> Policy:
    tc = rc.training
    if b.n_theta != tc.n_theta or b.n_cs != tc.hp.n_cs:
        raise CliError(f"bundle geometry (n_cs={b.n_cs}, n_theta={b.n_theta}) does not match the "
                       f"configuration (n_cs={tc.hp.n_cs}, n_theta={tc.n_theta})", EXIT_CONFIG)
    if not b.complete:
        raise CliError(f"bundle holds {len(b.tables)} of {b.n_cs + 1} curriculum steps "
                       "(training did not converge); refusing to evaluate", EXIT_RUNTIME)
    geo = tc.geometry(tc.hp.n_cs)
    stored = b.curriculum_geometry(tc.sigma, tc.sigma_a)
    if any(not np.allclose(list(asdict(x).values())[1:-1], list(asdict(y).values())[1:-1])
           for x, y in zip(stored.steps, geo.steps)):
        raise CliError("bundle geometry records do not match the configuration", EXIT_CONFIG)
    if b.config_hash != rc.config_hash:
        warnings.warn("bundle was trained with a different configuration than the one supplied",
                      qbundle.ConfigHashMismatch, stacklevel=1)
    tables = b.tables
    if rc.eval_settings.get("mirror_policy"):
        tables = [mirror_averaged(t) for t in tables]
    return Policy(tables, geo, tc.hp, tc.n_theta)


def cmd_eval(args) -> int:
    b = _load_bundle(args.bundle)
    if args.config is None and not _env_config():
        man_path = Path(args.bundle).with_name(MANIFEST_NAME)
        if not man_path.exists():
            raise CliError("no configuration given and no manifest next to the bundle",
                           EXIT_CONFIG)
        rc = cfgmod.from_raw(json.loads(man_path.read_text())["config"])
    else:
        rc = _load_config(args)
    if args.mirror_policy:
        rc.eval_settings["mirror_policy"] = True
    policy = policy_for(b, rc)
    scenario = rc.training.scenario
    rows = {}
    conditions = [("noiseless", False)]
    noise_on = rc.eval_settings["noise_battery"] if args.noise is None else args.noise
    if noise_on:
        conditions.append(("noise", True))
    for label, noisy in conditions:
        cfgs = rc.trial_configs(noisy=noisy, n_trials=args.trials, seed=args.seed)
        rows[label] = run_battery(policy, scenario, cfgs, jobs=args.jobs)
    text = results_table_text(rows)
    print(text, end="")
    out = Path(args.out) if args.out else None
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "results.txt").write_text(text)
            (out / "results.csv").write_text(results_table_csv(rows))
            if args.trajectories:
                for cfg in rc.trial_configs(n_trials=args.trials, seed=args.seed):
                    for i in range(min(args.trajectories, cfg.n_trials)):
                        res = run_trial(policy, scenario, cfg, i, keep_log=True)
                        name = cfg.name.replace(" ", "_").lower()
                        write_trajectory_csv(out / f"traj_{name}_{i:03d}.csv", res.log)
        except OSError as exc:
            raise CliError(f"cannot write results to {out}: {exc}", EXIT_RUNTIME)
    return EXIT_OK


def _env_config() -> bool:
    import os
    return bool(os.environ.get(cfgmod.CONFIG_ENV))


def cmd_inspect(args) -> int:
    b = _load_bundle(args.bundle)
    print(f"bundle      {args.bundle}")
    print(f"n_cs        {b.n_cs}")
    print(f"n_theta     {b.n_theta}")
    print(f"steps       {len(b.tables)} of {b.n_cs + 1}"
          + ("" if b.converged else "  (training did not converge)"))
    print(f"config      {b.config_hash.hex()[:16]}")
    print()
    print(f"{'step':>4}{'updates':>12}{'visited':>10}{'q_min':>10}{'q_max':>10}")
    for g, t in zip(b.geometry, b.tables):
        q = t.q_a + t.q_b
        coverage = float(np.count_nonzero(t.visits)) / t.visits.size
        qmin = float(min(t.q_a.min(), t.q_b.min()))
        qmax = float(max(t.q_a.max(), t.q_b.max()))
        assert math.isfinite(q.sum())
        print(f"{g.index:>4}{int(t.visits.sum()):>12}{fmt2(coverage):>10}"
              f"{fmt2(qmin):>10}{fmt2(qmax):>10}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mrlanding", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    cfg_help = (f"YAML config file or preset name ({', '.join(sorted(cfgmod.PRESETS))}); "
                f"defaults to ${cfgmod.CONFIG_ENV}")

    d = sub.add_parser("derive", help="print derived hyperparameters and curriculum geometry")
    d.add_argument("-c", "--config", help=cfg_help)
    d.add_argument("--kv", action="store_true", help="machine-readable key=value output")
    d.set_defaults(func=cmd_derive)

    t = sub.add_parser("train", help="train the curriculum and write bundle, log and manifest")
    t.add_argument("-c", "--config", help=cfg_help)
    t.add_argument("--seed", type=int)
    t.add_argument("--seeds", type=int, nargs="+", help="train several seeds into seed_<n>/")
    t.add_argument("--jobs", type=int, default=1, help="worker processes for multiple seeds")
    t.add_argument("--manifest", help="rerun exactly from an earlier run manifest")
    t.add_argument("-o", "--out", required=True, help="output directory")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="run landing-trial batteries with a trained bundle")
    e.add_argument("bundle")
    e.add_argument("-c", "--config", help=cfg_help + "; else the manifest beside the bundle")
    e.add_argument("--trials", type=int, help="trials per scenario")
    e.add_argument("--seed", type=int, help="evaluation seed")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--noise", dest="noise", action="store_true", default=None)
    g.add_argument("--no-noise", dest="noise", action="store_false")
    e.add_argument("--mirror-policy", action="store_true",
                   help="act greedily on Q-values averaged with their x -> -x reflection")
    e.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    e.add_argument("--trajectories", type=int, default=0,
                   help="write this many per-scenario trajectory CSVs")
    e.add_argument("-o", "--out", help="directory for results.csv/results.txt")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("inspect", help="summarise visit counts and Q-values of a bundle")
    i.add_argument("bundle")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
