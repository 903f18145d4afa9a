import dataclasses

import numpy as np
import pytest

from locoforce.config import load_setup
from locoforce.sim import (Disturbance, SimState, disturbance_force,
                           random_disturbances, rk4_step, run_scenario)
from conftest import config_path


def test_rk4_constant_velocity():
    r, v = rk4_step(np.zeros(3), np.array([1.0, 2.0, 0.0]),
                    lambda t: np.zeros(3), 0.0, 0.1)
    assert np.allclose(r, [0.1, 0.2, 0.0])
    assert np.allclose(v, [1.0, 2.0, 0.0])


def test_rk4_constant_acceleration_is_exact():
    a = np.array([0.0, 0.0, 2.0])
    r, v = np.zeros(3), np.zeros(3)
    t = 0.0
    for _ in range(100):
        r, v = rk4_step(r, v, lambda _t: a, t, 0.01)
        t += 0.01
    assert r[2] == pytest.approx(0.5 * 2.0 * 1.0**2, rel=1e-12)
    assert v[2] == pytest.approx(2.0, rel=1e-12)


def test_rk4_quadratic_forcing_is_exact():
    # a(t) = 6t has the cubic solution r = t^3, within RK4's exactness class
    r, v = np.zeros(1), np.zeros(1)
    t = 0.0
    for _ in range(50):
        r, v = rk4_step(r, v, lambda tt: np.array([6.0 * tt]), t, 0.02)
        t += 0.02
    assert r[0] == pytest.approx(1.0, rel=1e-10)


def test_impulse_changes_velocity_by_force_times_time_over_mass():
    mass = 25.0
    force = np.array([0.0, 5.0, 0.0])
    v = np.zeros(3)
    r = np.zeros(3)
    t = 0.0
    for _ in range(50):  # 0.5 s of constant force
        r, v = rk4_step(r, v, lambda _t: force / mass, t, 0.01)
        t += 0.01
    assert v[1] == pytest.approx(5.0 * 0.5 / 25.0, rel=1e-9)


def test_disturbance_windows_are_half_open():
    d = Disturbance(1.0, 0.5, np.array([3.0, 0.0, 0.0]))
    assert not d.active(0.99)
    assert d.active(1.0)
    assert d.active(1.49)
    assert not d.active(1.5)
    total = disturbance_force([d, Disturbance(1.2, 1.0, np.array([1.0, 0.0, 0.0]))], 1.3)
    assert total[0] == pytest.approx(4.0)
    with pytest.raises(ValueError):
        Disturbance(0.0, 0.0, np.zeros(3))


def test_random_disturbances_are_seeded_and_bounded():
    a = random_disturbances(np.random.default_rng(7), 4, 0.5, 5.5)
    b = random_disturbances(np.random.default_rng(7), 4, 0.5, 5.5)
    assert len(a) == 4
    for da, db in zip(a, b):
        assert da.t_start == db.t_start
        assert np.allclose(da.force, db.force)
        mag = np.linalg.norm(da.force)
        assert 5.0 <= mag <= 20.0
    assert random_disturbances(np.random.default_rng(0), 0, 0.0, 1.0) == []


def _short_hold_setup():
    setup, _, _ = load_setup(config_path("rail_hold"))
    return dataclasses.replace(setup, duration=1.0, random_disturbance_count=0)


def test_scenario_is_deterministic_for_a_seed():
    res_a = run_scenario(_short_hold_setup())
    res_b = run_scenario(_short_hold_setup())
    assert len(res_a.rows) == len(res_b.rows)
    for ra, rb in zip(res_a.rows, res_b.rows):
        for key in ra:
            if key == "solve_ms":
                continue
            assert ra[key] == rb[key], key


def test_undisturbed_hold_barely_drifts():
    res = run_scenario(_short_hold_setup())
    m = res.metrics
    assert not m.unstable
    assert m.stale_plans == 0
    assert m.min_zmp_margin > 0.0
    assert m.tracking_rms <= 0.01
    last = res.rows[-1]
    assert abs(last["rx"]) <= 0.01 and abs(last["ry"]) <= 0.01
    assert abs(last["rz"] - 0.4) <= 0.01


def test_metrics_cover_every_tick():
    setup = _short_hold_setup()
    res = run_scenario(setup)
    assert res.metrics.ticks == int(round(setup.duration / setup.tick))
    assert len(res.rows) == res.metrics.ticks
    assert len(res.plans) == res.metrics.ticks
    assert res.metrics.solve_ms_max >= res.metrics.solve_ms_median > 0.0
