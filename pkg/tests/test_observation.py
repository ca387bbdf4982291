import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import signal

from mrlanding.kinematics import PlatformState, TrajectoryKind, TrajectorySpec
from mrlanding.observation import (
    AccelFilter,
    Axis,
    NoiseModel,
    RelativeObservation,
    add_noise,
    axis_project,
    filtered_accel,
    normalize_clip,
    relative_state,
)
from mrlanding.scenario import PRESETS
from mrlanding.sim import FlightSim
from mrlanding.vehicle import UavState

finite = st.floats(-50, 50)


def plat(pos=(0.0, 0.0), vel=(0.0, 0.0)):
    return PlatformState((*pos, 0.0), (*vel, 0.0), (0.0, 0.0, 0.0))


def test_relative_state_examples():
    rel = relative_state(UavState(), plat())
    assert rel.p_c == (0.0, 0.0, 0.0) and rel.v_c == (0.0, 0.0, 0.0)
    rel = relative_state(UavState(psi=math.pi / 4), plat((1.0, 0.0)))
    assert rel.p_c[:2] == pytest.approx((0.7071068, -0.7071068), abs=1e-7)
    rel = relative_state(UavState(), plat(vel=(0.4, 0.0)))
    assert rel.v_c == (0.4, 0.0, 0.0)


def test_relative_attitude_is_negated_uav_attitude():
    rel = relative_state(UavState(phi=0.1, theta=-0.2, psi=0.3), plat())
    assert rel.phi_c == (-0.1, 0.2, -0.3)


@given(x=finite, y=finite, px=finite, py=finite, psi=st.floats(-7, 7))
def test_rotation_preserves_norm(x, y, px, py, psi):
    rel = relative_state(UavState(x=x, y=y, psi=psi), plat((px, py)))
    assert math.hypot(*rel.p_c[:2]) == pytest.approx(math.hypot(px - x, py - y), abs=1e-12)


def test_filter_coefficients_match_scipy_butterworth():
    f = AccelFilter(0.3, 0.01)
    b, a = signal.butter(1, 0.3, fs=100.0)
    assert b == pytest.approx([f.b0, f.b0], rel=1e-12)
    assert a == pytest.approx([1.0, f.a1], rel=1e-12)
    assert f.b0 == pytest.approx(0.0093371, abs=1e-7)
    assert f.a1 == pytest.approx(-0.9813259, abs=1e-7)


def test_filter_matches_scipy_lfilter_on_random_input():
    rng = np.random.default_rng(3)
    v = np.cumsum(rng.normal(size=(500, 3)), axis=0) * 0.01
    f = AccelFilter(0.3, 0.01)
    ours = [filtered_accel(f, tuple(row), 0.01) for row in v]
    deriv = np.diff(v, axis=0) / 0.01
    b, a = signal.butter(1, 0.3, fs=100.0)
    zi = signal.lfilter_zi(b, a)
    for k in range(3):
        ref, _ = signal.lfilter(b, a, deriv[:, k], zi=zi * deriv[0, k])
        assert np.allclose([o[k] for o in ours[1:]], ref, rtol=1e-12, atol=1e-12)
    assert ours[0] == (0.0, 0.0, 0.0)


def test_constant_velocity_gives_zero_acceleration():
    f = AccelFilter()
    for _ in range(200):
        out = filtered_accel(f, (0.3, -1.0, 0.0), 0.01)
    assert out == (0.0, 0.0, 0.0)


def test_ramp_converges_to_slope():
    f = AccelFilter()
    t_settle = 5 / (2 * math.pi * 0.3)
    for k in range(int(t_settle / 0.01) + 2):
        out = filtered_accel(f, (0.01 * k, 0.0, 0.0), 0.01)
    assert out[0] == pytest.approx(1.0, rel=0.01)


def test_step_spike_is_attenuated_by_filter_gain():
    f = AccelFilter()
    for _ in range(10):
        filtered_accel(f, (0.0, 0.0, 0.0), 0.01)
    out = filtered_accel(f, (1.0, 0.0, 0.0), 0.01)
    assert out[0] == pytest.approx(f.b0 * 100.0, rel=1e-12)
    assert out[0] < 1.0


def test_cutoff_frequency_attenuation():
    fc = 0.3
    w = 2 * math.pi * fc
    f = AccelFilter(fc, 0.01)
    peaks = []
    for k in range(6000):
        t = 0.01 * k
        out = filtered_accel(f, (math.sin(w * t) / w, 0.0, 0.0), 0.01)
        if t > 40.0:
            peaks.append(abs(out[0]))
    assert max(peaks) == pytest.approx(1 / math.sqrt(2), rel=0.02)


def test_normalize_clip_examples():
    assert normalize_clip(4.5, 0, 0, 4.5, 1, 1).p == 1.0
    assert normalize_clip(-9.0, 0, 0, 4.5, 1, 1).p == -1.0
    n = normalize_clip(2.25, 1.697, 0.64, 4.5, 3.394, 1.28)
    assert n == pytest.approx((0.5, 0.5, 0.5), abs=1e-12)


def test_normalize_clip_bounds_vectorised_sample():
    rng = np.random.default_rng(0)
    raw = rng.normal(scale=10.0, size=(20_000, 3))
    out = np.array([normalize_clip(*r, 4.5, 3.394, 1.28) for r in raw])
    assert np.all(np.abs(out) <= 1.0)


@given(p=finite, v=finite, a=finite)
def test_normalize_clip_bounds(p, v, a):
    assert all(-1.0 <= x <= 1.0 for x in normalize_clip(p, v, a, 1.0, 2.5, 0.32))


def test_axis_project():
    obs = RelativeObservation((1.0, 2.0, 3.0), (4.0, 5.0, 6.0), (7.0, 8.0, 9.0))
    assert axis_project(obs, Axis.LONGITUDINAL) == (1.0, 4.0, 7.0)
    assert axis_project(obs, Axis.LATERAL) == (2.0, 5.0, 8.0)
    swapped = RelativeObservation((2.0, 1.0, 3.0), (5.0, 4.0, 6.0), (8.0, 7.0, 9.0))
    assert axis_project(swapped, Axis.LONGITUDINAL) == axis_project(obs, Axis.LATERAL)
    assert axis_project(swapped, Axis.LATERAL) == axis_project(obs, Axis.LONGITUDINAL)


def test_zero_noise_is_identity():
    obs = RelativeObservation((1.0, 2.0, 3.0), (4.0, 5.0, 6.0))
    assert add_noise(obs, NoiseModel((0,) * 6), np.random.default_rng(0)) is obs


def test_noise_variance():
    model = NoiseModel()
    rng = np.random.default_rng(42)
    obs = RelativeObservation((0.0,) * 3, (0.0,) * 3)
    draws = np.array([(*o.p_c, *o.v_c) for o in (add_noise(obs, model, rng)
                                                 for _ in range(100_000))])
    var = draws.var(axis=0)
    assert np.allclose(var, np.square(model.sigma), rtol=0.03)


def test_noise_is_reproducible():
    obs = RelativeObservation((0.0,) * 3, (0.0,) * 3)
    a = [add_noise(obs, NoiseModel(), np.random.default_rng(7)) for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel((0.1,) * 5)
    with pytest.raises(ValueError):
        NoiseModel((0.1, 0.1, 0.1, -0.1, 0.1, 0.1))


def _lateral_stream(psi):
    sc = PRESETS["hardware_rpm_0.4"]
    uav = UavState(x=0.4, y=0.0, z=2.5, psi=psi, psi_ref=psi, vz_ref=-0.1)
    sim = FlightSim(sc, TrajectorySpec(TrajectoryKind.RPM, 0.4, 0.5), uav)
    out = [axis_project(sim.obs, Axis.LATERAL)]
    for k in range(1, 500):
        sim.advance_to(k * 5)
        out.append(axis_project(sim.obs, Axis.LATERAL))
    return out


def test_lateral_observations_vanish_without_relative_yaw():
    assert all(o == (0.0, 0.0, 0.0) for o in _lateral_stream(0.0))


def test_lateral_observations_appear_with_relative_yaw():
    stream = _lateral_stream(-math.pi / 4)
    assert stream[0] != (0.0, 0.0, 0.0)
