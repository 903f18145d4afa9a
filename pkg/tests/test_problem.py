import numpy as np
import pytest

from locoforce.contacts import (ForceEvent, ForceSchedule, GaitParams,
                                ManipContact, SupportPolygon,
                                generate_support_sequence)
from locoforce.problem import (COEFFS_PER_SPLINE, AssemblyError, CostWeights,
                               DecisionLayout, DesiredMotion, LowLoadError,
                               QuadCost, RobotParams, ZmpConstraint,
                               deviation_cost, free_motion_eqs,
                               friction_pyramid_ineqs, force_limit_ineqs,
                               initial_match_cost, initial_point_eqs,
                               junction_eqs, min_accel_cost,
                               task_tracking_cost, zmp_residual)
from locoforce.splines import accel_gram, basis_row, sample_times
from locoforce.validation import zmp_point

FEET = np.array([[0.25, 0.15, 0.0], [0.25, -0.15, 0.0],
                 [-0.25, 0.15, 0.0], [-0.25, -0.15, 0.0]])


def contact(free=(False, False, False), f_lim=200.0):
    return ManipContact(r_cm=np.array([0.4, 0.0, 0.0]), free_mask=free,
                        jacobian=0.3 * np.eye(3), tau_lim=np.full(3, 60.0),
                        f_lo=np.full(3, -f_lim), f_hi=np.full(3, f_lim))


def simple_layout():
    layout = DecisionLayout(1, 1)
    motion = [(0.0, 1.0)]
    force = [(0.0, 1.0)]
    return layout, motion, force


def test_decision_layout_sizes_and_blocks():
    walking = DecisionLayout(5, 1)
    assert walking.size == 108
    stationary = DecisionLayout(1, 1)
    assert stationary.size == 36
    assert walking.motion_block(0) == slice(0, 18)
    assert walking.force_block(0) == slice(90, 108)
    with pytest.raises(AssemblyError):
        walking.motion_block(5)
    with pytest.raises(AssemblyError):
        DecisionLayout(0, 1)


def test_stacked_basis_samples_the_right_block():
    layout = DecisionLayout(2, 1)
    rows = layout.stacked_basis("force", 0, 0.5, 0)
    x = np.zeros(layout.size)
    x[layout.force_block(0)] = np.tile([0, 0, 0, 0, 0, 2.0], 3)  # constant 2
    assert np.allclose(rows @ x, 2.0)
    assert np.allclose(layout.stacked_basis("motion", 0, 0.5, 0) @ x, 0.0)


def test_tracking_cost_minimizer_matches_normal_equations():
    layout, motion, force = simple_layout()
    desired = DesiredMotion(np.array([1.0, 0.0, 0.3]), np.array([0.2, 0.0, 0.0]))
    events = ForceSchedule((ForceEvent(0.0, 1.0, np.array([-5.0, 0.0, 0.0])),))
    weights = CostWeights()
    cost = task_tracking_cost(layout, motion, desired, force, events, weights)

    # independent normal-equations oracle over the same samples
    rows, targets, w = [], [], []
    for t in sample_times(0.0, 1.0):
        for deriv, wgt in ((0, weights.track_value), (1, weights.track_rate),
                           (2, weights.track_accel)):
            rows.append(layout.stacked_basis("motion", 0, t, deriv))
            targets.append([desired.pos(t), desired.vel(t), desired.acc(t)][deriv])
            w.append(wgt)
        for deriv, wgt in ((0, weights.force_value), (1, weights.force_rate),
                           (2, weights.force_accel)):
            rows.append(layout.stacked_basis("force", 0, t, deriv))
            targets.append(events.value_at(t)[deriv])
            w.append(wgt)
    R = np.vstack(rows)
    y = np.concatenate(targets)
    W = np.repeat(w, 3)
    Q_oracle = 2.0 * R.T @ (W[:, None] * R)
    b_oracle = -2.0 * R.T @ (W * y)
    assert np.allclose(cost.Q, Q_oracle, atol=1e-10)
    assert np.allclose(cost.b, b_oracle, atol=1e-10)

    # a quintic fits the constant-velocity / constant-force targets exactly
    x_star = np.linalg.lstsq(cost.Q + 1e-9 * np.eye(layout.size), -cost.b,
                             rcond=None)[0]
    motion_coeffs = x_star[layout.motion_block(0)].reshape(3, 6)
    assert np.allclose(motion_coeffs @ basis_row(0.7, 0), desired.pos(0.7), atol=1e-5)
    force_coeffs = x_star[layout.force_block(0)].reshape(3, 6)
    assert np.allclose(force_coeffs @ basis_row(0.7, 0), [-5.0, 0.0, 0.0], atol=1e-4)


def test_quadcost_value_convention():
    layout, _, _ = simple_layout()
    cost = QuadCost.zeros(layout)
    rows = np.eye(layout.size)[:3]
    target = np.array([1.0, 2.0, 3.0])
    cost.add_residual(rows, target, 0.5)
    x = np.zeros(layout.size)
    x[:3] = [1.0, 2.0, 3.0]
    # value omits the constant ||y||^2 term: at the minimizer it equals -w*||y||^2
    assert cost.value(x) == pytest.approx(-0.5 * float(target @ target))


def test_deviation_cost_is_zero_on_the_previous_plan():
    from locoforce.planner import _trajectories

    layout, motion, force = simple_layout()
    rng = np.random.default_rng(5)
    x_prev = rng.normal(size=layout.size)
    prev_motion, prev_force = _trajectories(layout, x_prev, motion, force)
    cost = deviation_cost(layout, motion, force, prev_motion, prev_force,
                          0.0, CostWeights())
    # at x = x_prev every residual vanishes (constant term included manually)
    res_const = 0.0
    for kind, traj, w in (("motion", prev_motion, 1.0), ("force", prev_force, 1.0)):
        for t in sample_times(0.0, 1.0):
            for d in (0, 1, 2):
                res_const += w * float(traj.eval(t, d) @ traj.eval(t, d))
    assert cost.value(x_prev) + res_const == pytest.approx(0.0, abs=1e-6)


def test_initial_match_cost_anchors_acceleration_and_force():
    layout, motion, force = simple_layout()
    a_meas = np.array([0.1, -0.2, 0.3])
    f_meas = np.array([-5.0, 1.0, 2.0])
    cost = initial_match_cost(layout, motion, force, a_meas, f_meas, CostWeights())
    x_star = np.linalg.lstsq(cost.Q, -cost.b, rcond=None)[0]
    acc0 = x_star[layout.motion_block(0)].reshape(3, 6) @ basis_row(0.0, 2)
    f0 = x_star[layout.force_block(0)].reshape(3, 6) @ basis_row(0.0, 0)
    assert np.allclose(acc0, a_meas, atol=1e-8)
    assert np.allclose(f0, f_meas, atol=1e-8)


def test_min_accel_cost_equals_accel_gram_quadratic_form():
    layout, motion, _ = simple_layout()
    weights = CostWeights(min_accel=0.7)
    cost = min_accel_cost(layout, motion, weights)
    rng = np.random.default_rng(6)
    coeffs = rng.normal(size=(3, 6))
    x = np.zeros(layout.size)
    x[layout.motion_block(0)] = coeffs.reshape(-1)
    gram = accel_gram(0.0, 1.0)
    expected = 0.7 * sum(coeffs[axis] @ gram @ coeffs[axis] for axis in range(3))
    assert cost.value(x) == pytest.approx(expected, rel=1e-10)


def test_junction_and_initial_equality_row_counts():
    walking = DecisionLayout(5, 1)
    domains = [(0.0, 0.1), (0.1, 0.35), (0.35, 0.45), (0.45, 0.7), (0.7, 0.8)]
    junc = junction_eqs(walking, domains)
    assert junc.A.shape[0] == 4 * 2 * 3  # joins x {pos, vel} x axes
    init = initial_point_eqs(walking, domains, np.zeros(3), np.zeros(3))
    assert init.A.shape[0] == 6
    # a state satisfying both: constant position at the measured point
    x = np.zeros(walking.size)
    r = np.array([0.3, -0.1, 0.45])
    for i in range(5):
        x[walking.motion_block(i)] = np.outer(r, [0, 0, 0, 0, 0, 1.0]).reshape(-1)
    init = initial_point_eqs(walking, domains, r, np.zeros(3))
    assert np.abs(junc.A @ x - junc.rhs).max() <= 1e-12
    assert np.abs(init.A @ x - init.rhs).max() <= 1e-12


def test_free_motion_rows_zero_whole_axis_blocks():
    layout = DecisionLayout(1, 2)
    eq = free_motion_eqs(layout, (True, False, True))
    assert eq.A.shape[0] == 2 * 2 * 6  # splines x free axes x coefficients
    assert np.allclose(eq.rhs, 0.0)
    none = free_motion_eqs(layout, (False, False, False))
    assert none.A.shape[0] == 0


def test_friction_rows_match_hand_computed_example():
    layout, motion, force = simple_layout()
    params = RobotParams(mass=30.0, friction=0.3, r_meas=np.zeros(3),
                         v_meas=np.zeros(3))
    ineq = friction_pyramid_ineqs(layout, params, motion, force)
    assert ineq.G.shape[0] == 6 * 4  # samples x (2 axes x 2 signs)
    assert np.allclose(ineq.h, 0.3 * 30.0 * 9.81)

    def rows_at(a, f):
        x = np.zeros(layout.size)
        # encode a constant acceleration via the t^2 coefficient: a = 2*c2
        c = np.zeros((3, 6)); c[:, 3] = a / 2.0
        x[layout.motion_block(0)] = c.reshape(-1)
        cf = np.zeros((3, 6)); cf[:, 5] = f
        x[layout.force_block(0)] = cf.reshape(-1)
        return ineq.G @ x - ineq.h

    # zero accel, zero force: slack everywhere
    assert rows_at(np.zeros(3), np.zeros(3)).max() == pytest.approx(-0.3 * 30 * 9.81)
    # tangential acceleration right at the boundary mu*g
    a_lim = np.array([0.3 * 9.81, 0.0, 0.0])
    assert rows_at(a_lim, np.zeros(3)).max() == pytest.approx(0.0, abs=1e-9)
    # pressing down with 40 N (f_z = -40) buys mu*40 = 12 N of tangential room
    f_down = np.array([0.0, 0.0, -40.0])
    worst = rows_at(a_lim, f_down).max()
    assert worst == pytest.approx(-0.3 * 40.0, abs=1e-9)
    # the baseline variant ignores the manipulation force entirely
    base = friction_pyramid_ineqs(layout, params, motion, force, include_force=False)
    xb = np.zeros(layout.size)
    cf = np.zeros((3, 6)); cf[:, 5] = f_down
    xb[layout.force_block(0)] = cf.reshape(-1)
    assert np.allclose(base.G @ xb, 0.0)


def test_force_limit_rows_cover_torque_and_box():
    layout, _, force = simple_layout()
    con = contact(f_lim=100.0)
    ineq = force_limit_ineqs(layout, con, force)
    assert ineq.G.shape[0] == 6 * (3 + 6)  # samples x (torques + box pairs)
    x = np.zeros(layout.size)
    cf = np.zeros((3, 6)); cf[:, 5] = [150.0, 0.0, 0.0]  # beyond the box
    x[layout.force_block(0)] = cf.reshape(-1)
    assert (ineq.G @ x - ineq.h).max() == pytest.approx(50.0)
    # torque rows: J = 0.3*I, tau_lim = 60 -> binding at |f| = 200
    cf[:, 5] = [200.0, 0.0, 0.0]
    x[layout.force_block(0)] = cf.reshape(-1)
    torque_rows = ineq.G @ x - ineq.h
    assert torque_rows.max() == pytest.approx(100.0)  # box row dominates


def ccw_square(half_x=0.25, half_y=0.15):
    return SupportPolygon.from_vertices(
        np.array([[-half_x, -half_y], [half_x, -half_y],
                  [half_x, half_y], [-half_x, half_y]]), 0.0, 1.0)


def state_vector(layout, r, a, f):
    x = np.zeros(layout.size)
    c = np.zeros((3, 6)); c[:, 5] = r; c[:, 3] = a / 2.0
    x[layout.motion_block(0)] = c.reshape(-1)
    cf = np.zeros((3, 6)); cf[:, 5] = f
    x[layout.force_block(0)] = cf.reshape(-1)
    return x


def test_payload_moment_shifts_pressure_point_by_quotient_formula():
    # 0.4 m lever, 29.43 N payload hanging from a 30 kg robot:
    # shift = d*F / (m*g + F) = 0.4*29.43 / (294.3 + 29.43)
    params = RobotParams(mass=30.0, friction=0.6,
                         r_meas=np.array([0.0, 0.0, 0.45]), v_meas=np.zeros(3))
    arm = np.array([0.4, 0.0, 0.0])
    zmp = zmp_point(np.array([0.0, 0.0, 0.45]), np.zeros(3),
                    np.array([0.0, 0.0, -29.43]), params, arm)
    expected = 0.4 * 29.43 / (30.0 * 9.81 + 29.43)
    assert zmp[0] == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(0.036364, abs=1e-6)
    assert zmp[1] == pytest.approx(0.0, abs=1e-12)


def test_zmp_rows_agree_with_quotient_form():
    layout, motion, force = simple_layout()
    params = RobotParams(mass=30.0, friction=0.6,
                         r_meas=np.array([0.0, 0.0, 0.45]), v_meas=np.zeros(3))
    con = contact()
    poly = ccw_square()
    rng = np.random.default_rng(7)
    for _ in range(20):
        r = np.array([0.0, 0.0, 0.45]) + 0.05 * rng.normal(size=3)
        a = 0.5 * rng.normal(size=3)
        f = np.array([0.0, 0.0, -20.0]) + 5.0 * rng.normal(size=3)
        x = state_vector(layout, r, a, f)
        res, _ = zmp_residual(layout, x, 0.5, poly, params, con, 0, 0)
        # the t^2 coefficient encoding the acceleration also moves the
        # position: r(0.5) = r + a/2 * 0.25
        r_eval = r + a * 0.125
        zmp = zmp_point(r_eval, a, f, params, con.r_cm)
        vals = poly.halfspaces[:, :2] @ zmp[:2] + poly.halfspaces[:, 2]
        load = 30.0 * (a[2] + 9.81) - f[2]
        assert np.allclose(res, vals * load, rtol=1e-9, atol=1e-9)


def test_zmp_residual_guards_low_vertical_load():
    layout, motion, force = simple_layout()
    params = RobotParams(mass=30.0, friction=0.6,
                         r_meas=np.array([0.0, 0.0, 0.45]), v_meas=np.zeros(3))
    con = contact()
    poly = ccw_square()
    # free fall: net vertical load vanishes
    x = state_vector(layout, np.array([0.0, 0.0, 0.45]),
                     np.array([0.0, 0.0, -9.81]), np.zeros(3))
    with pytest.raises(LowLoadError):
        zmp_residual(layout, x, 0.5, poly, params, con, 0, 0)


def test_zmp_jacobian_matches_central_finite_differences():
    # full walking-size constraint, 100 random states
    gait = GaitParams()
    support = generate_support_sequence(FEET, np.array([0.3, 0.0, 0.0]), gait)
    motion = support.domains()
    force = [(0.0, support.cycle_duration)]
    layout = DecisionLayout(len(motion), len(force))
    assert layout.size == 108
    params = RobotParams(mass=30.0, friction=0.6,
                         r_meas=np.array([0.0, 0.0, 0.45]), v_meas=np.zeros(3))
    con = ZmpConstraint(layout, params, contact(), motion, force, support)

    rng = np.random.default_rng(8)
    base = np.zeros(layout.size)
    for i in range(len(motion)):
        c = np.zeros((3, 6)); c[:, 5] = [0.0, 0.0, 0.45]
        base[layout.motion_block(i)] = c.reshape(-1)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        x = base + 0.05 * rng.normal(size=layout.size)
        jac = con.jacobian(x)
        cols = rng.choice(layout.size, size=12, replace=False)
        for k in cols:
            e = np.zeros(layout.size); e[k] = h
            fd = (con.residual(x + e) - con.residual(x - e)) / (2 * h)
            scale = max(1.0, float(np.abs(jac[:, k]).max()))
            worst = max(worst, float(np.abs(fd - jac[:, k]).max()) / scale)
    assert worst <= 1e-5


def test_problem_dims_for_walking_and_stationary():
    from locoforce.planner import RobotState, TaskSpec, build_problem

    params = RobotParams(mass=30.0, friction=0.6,
                         r_meas=np.array([0.0, 0.0, 0.45]), v_meas=np.zeros(3))
    gait = GaitParams()
    events = ForceSchedule((ForceEvent(0.0, 1.0, np.zeros(3)),))
    state = RobotState(r=np.array([0.0, 0.0, 0.45]), v=np.zeros(3), feet=FEET)

    task_walk = TaskSpec(np.array([0.3, 0.0, 0.0]), events, contact())
    support = generate_support_sequence(FEET, task_walk.v_des, gait, state.v)
    prob, _ = build_problem(state, task_walk, support,
                            events.window(0.0, support.cycle_duration),
                            params, CostWeights())
    dims = prob.dims()
    assert dims["variables"] == 108
    assert dims["equalities"] == 30  # 6 initial + 4 joins x 2 derivs x 3 axes

    task_hold = TaskSpec(np.zeros(3), events, contact())
    support = generate_support_sequence(FEET, task_hold.v_des, gait, state.v)
    prob, _ = build_problem(state, task_hold, support,
                            events.window(0.0, support.cycle_duration),
                            params, CostWeights())
    assert prob.dims()["variables"] == 36
    assert prob.dims()["equalities"] == 6
