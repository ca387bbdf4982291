import json
from pathlib import Path

import numpy as np
import pytest

from mrlanding import bundle as qbundle, config as cfgmod
from mrlanding.agent import Policy
from mrlanding.cli import BUNDLE_NAME, policy_for, train_one
from mrlanding.discretization import CurriculumGeometry
from mrlanding.double_q import QTablePair, table_shape
from mrlanding.scenario import PRESETS, derive_hyperparams
from mrlanding.vehicle import ACTIONS, apply_action

HARDWARE = "hardware_rpm_0.4"
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def rule_tables(n_theta: int = 3) -> QTablePair:
    """Hand-built tables that steer the pitch index towards closing the gap.

    The preferred index is the centre shifted against the sign of the
    position and velocity classes; action values are minus the distance to
    it, with a tiny per-action offset so that no two actions ever tie.
    """
    shape = table_shape(n_theta)
    q = np.zeros(shape)
    for p_d, v_d, a_d, i in np.ndindex(shape[:4]):
        target = n_theta - (p_d - 1) - (v_d - 1)
        for a in ACTIONS:
            q[p_d, v_d, a_d, i, a] = -abs(apply_action(i, a, n_theta) - target) - 1e-3 * a
    return QTablePair(q, q.copy(), np.zeros(shape, dtype=np.uint64))


def rule_policy(scenario: str = HARDWARE) -> Policy:
    hp = derive_hyperparams(PRESETS[scenario])
    geo = CurriculumGeometry.build(hp.n_cs)
    return Policy([rule_tables() for _ in range(hp.n_cs + 1)], geo, hp, 3)


@pytest.fixture(scope="session")
def hardware_config() -> cfgmod.RunConfig:
    return cfgmod.load(HARDWARE)


@pytest.fixture(scope="session")
def trained_pipeline(tmp_path_factory, hardware_config):
    """One full training run of the hardware case through the CLI code path."""
    out = tmp_path_factory.mktemp("train_a")
    manifest = train_one(hardware_config.raw, 0, out)
    data = (out / BUNDLE_NAME).read_bytes()
    b = qbundle.from_bytes(data)
    return {"dir": Path(out), "manifest": manifest, "bytes": data, "bundle": b,
            "policy": policy_for(b, hardware_config) if b.complete else None}


@pytest.fixture(scope="session")
def manifest_json(trained_pipeline):
    return json.loads((trained_pipeline["dir"] / "manifest.json").read_text())
