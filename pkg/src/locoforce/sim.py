"""Closed-loop surrogate environment around the planner.

The whole-body controller and rigid-body dynamics are replaced by an ideal
point mass: planned accelerations are realized exactly, except for external
forces the planner did not model, which act through ``F/m``.  A manipulator
contact on a constrained axis behaves like a stiff grasp: a configurable
fraction of any disturbance along that axis is transmitted into the contact
(and shows up in the measured end-effector force) instead of accelerating the
body.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import numpy as np

from . import planner as pl
from .contacts import ForceSchedule
from .planner import Plan, PlanningError, RobotState, TaskSpec, sample_plan
from .problem import CostWeights, RobotParams
from .validation import check_plan, zmp_point


@dataclass
class SimState:
    r: np.ndarray
    v: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class Disturbance:
    t_start: float
    duration: float
    force: np.ndarray

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError("disturbance duration must be positive")
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_start + self.duration


def disturbance_force(disturbances, t: float) -> np.ndarray:
    total = np.zeros(3)
    for d in disturbances:
        if d.active(t):
            total = total + d.force
    return total


def random_disturbances(rng: np.random.Generator, count: int, t0: float, t1: float,
                        duration: float = 0.4,
                        magnitude: tuple = (5.0, 20.0)) -> list:
    """Seeded random pushes: uniform direction, magnitude in the given band."""
    out = []
    if count <= 0:
        return out
    starts = np.linspace(t0, max(t0, t1 - duration), count)
    for t_start in starts:
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        mag = rng.uniform(*magnitude)
        out.append(Disturbance(float(t_start), duration, mag * direction))
    return out


def rk4_step(r: np.ndarray, v: np.ndarray, accel, t: float, dt: float):
    """Classical fixed-step integration of (r' = v, v' = a(t, r, v))."""
    k1r = v
    k1v = accel(t)
    k2r = v + 0.5 * dt * k1v
    k2v = accel(t + 0.5 * dt)
    k3r = v + 0.5 * dt * k2v
    k3v = accel(t + 0.5 * dt)
    k4r = v + dt * k3v
    k4v = accel(t + dt)
    r_new = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    v_new = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return r_new, v_new


def step(state: SimState, plan: Plan, dt: float, mass: float,
         external) -> SimState:
    """Advance the point mass by ``dt`` under the plan plus external forces.

    ``external(t)`` returns the unmodeled force (already shielded by any
    contact transmission).  Raises if the plan cannot cover the step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if state.time + dt - plan.t_created > plan.horizon + 1e-9:
        raise PlanningError("plan horizon exhausted; replan required")

    def accel(t):
        planned = plan.motion.eval(min(t - plan.t_created, plan.motion.end), 2)
        return planned + external(t) / mass

    r, v = rk4_step(state.r, state.v, accel, state.time, dt)
    return SimState(r, v, state.time + dt)


@dataclass
class ScenarioMetrics:
    min_zmp_margin: float
    friction_violations: int
    tracking_rms: float
    solve_ms_mean: float
    solve_ms_median: float
    solve_ms_max: float
    unstable: bool
    unstable_t: float | None
    ticks: int
    stale_plans: int


@dataclass
class ScenarioResult:
    metrics: ScenarioMetrics
    rows: list            # one dict per tick, CSV-ready
    plans: list
    disturbances: list


@dataclass(frozen=True)
class ScenarioSetup:
    """Everything run_scenario needs, independent of file formats."""

    mass: float
    friction: float
    com_height: float
    feet_offsets: np.ndarray          # stance relative to the CoM ground point
    task: TaskSpec
    gait: "object"
    weights: CostWeights
    solver_opts: "object"
    disturbances: list
    duration: float
    tick: float = 0.05
    dt: float = 0.01
    transmission: float = 0.85
    seed: int = 0
    random_disturbance_count: int = 0


def _measured_force(setup: ScenarioSetup, t: float, dist: np.ndarray) -> np.ndarray:
    """End-effector force the sensor would report: the event profile plus the
    grasp reaction to disturbances on constrained axes."""
    profile = setup.task.force_schedule.value_at(min(t, setup.task.force_schedule.end))[0]
    f = profile.copy()
    for axis, is_free in enumerate(setup.task.manip.free_mask):
        if not is_free:
            f[axis] -= setup.transmission * dist[axis]
    return f


def _shielded(setup: ScenarioSetup, dist: np.ndarray) -> np.ndarray:
    """Portion of a disturbance that still accelerates the body."""
    out = dist.copy()
    for axis, is_free in enumerate(setup.task.manip.free_mask):
        if not is_free:
            out[axis] *= 1.0 - setup.transmission
    return out


def run_scenario(setup: ScenarioSetup) -> ScenarioResult:
    """Lockstep plan/step loop with metrics; deterministic for a given seed."""
    rng = np.random.default_rng(setup.seed)
    disturbances = list(setup.disturbances)
    if setup.random_disturbance_count:
        disturbances += random_disturbances(rng, setup.random_disturbance_count,
                                            0.5, setup.duration - 0.5)

    r0 = np.array([0.0, 0.0, setup.com_height])
    state = SimState(r0.copy(), np.zeros(3))
    desired_origin = r0.copy()
    arm_offset = None
    plan: Plan | None = None
    rows: list[dict] = []
    plans: list[Plan] = []
    solve_ms: list[float] = []
    friction_violations = 0
    min_margin = np.inf
    unstable = False
    unstable_t = None
    tracking_sq = []
    mu, m, g = setup.friction, setup.mass, 9.81

    # a stationary robot keeps its footholds; a walking one steps under itself
    stationary = float(np.hypot(*setup.task.v_des[:2])) < setup.gait.stationary_eps
    feet_fixed = setup.feet_offsets + np.array([r0[0], r0[1], 0.0])

    n_ticks = int(round(setup.duration / setup.tick))
    for k in range(n_ticks):
        t = k * setup.tick
        dist = disturbance_force(disturbances, t)
        feet = feet_fixed if stationary else \
            setup.feet_offsets + np.array([state.r[0], state.r[1], 0.0])
        a_meas = plan.motion.eval(min(t - plan.t_created, plan.motion.end), 2) if plan else np.zeros(3)
        robot_state = RobotState(r=state.r, v=state.v, a=a_meas,
                                 f_m=_measured_force(setup, t, dist), feet=feet)
        params = RobotParams(mass=m, friction=mu, r_meas=state.r, v_meas=state.v,
                             a_meas=a_meas, f_meas=robot_state.f_m)
        plan = pl.plan_once(robot_state, setup.task, params, setup.gait,
                            weights=setup.weights, opts=setup.solver_opts,
                            previous=plan, now=t)
        plans.append(plan)
        solve_ms.append(plan.solve_stats.solve_time * 1e3)

        # score the instant with the forces that actually act on the robot:
        # the arm executes the freshly planned force, and the grasp passes the
        # transmitted share of the disturbance through on constrained axes
        if arm_offset is None:
            arm_offset = params.rotation @ setup.task.manip.r_cm
        f_actual = plan.force.eval(0.0, 0) + (_shielded(setup, dist) - dist)
        a_now = plan.motion.eval(0.0, 2)
        zmp = zmp_point(state.r, a_now, f_actual, params, arm_offset)
        poly = plan.support.polygon_at(min(t - plan.t_created, plan.horizon))
        margin = poly.boundary_distance(zmp)
        min_margin = min(min_margin, margin)
        if margin < 0.0 and not unstable:
            unstable = True
            unstable_t = t

        f_foot = m * a_now - m * params.gravity_vec - f_actual
        fr_worst = max(abs(f_foot[0]), abs(f_foot[1])) - mu * f_foot[2]
        if fr_worst > 1e-6:
            friction_violations += 1

        desired = desired_origin + setup.task.v_des * t
        tracking_sq.append(float(np.sum((state.r - desired) ** 2)))

        planned_f = plan.force.eval(min(t - plan.t_created, plan.force.end), 0)
        rows.append({
            "t": t,
            "rx": state.r[0], "ry": state.r[1], "rz": state.r[2],
            "vx": state.v[0], "vy": state.v[1], "vz": state.v[2],
            "ax": a_now[0], "ay": a_now[1], "az": a_now[2],
            "fx": planned_f[0], "fy": planned_f[1], "fz": planned_f[2],
            "zmp_x": zmp[0], "zmp_y": zmp[1],
            "margin": margin,
            "solve_ms": solve_ms[-1],
        })

        # integrate to the next tick in fixed substeps
        n_sub = max(1, int(round(setup.tick / setup.dt)))
        sub_dt = setup.tick / n_sub
        for _ in range(n_sub):
            ext = _shielded(setup, disturbance_force(disturbances, state.time))
            state = step(state, plan, sub_dt, m, lambda _t, e=ext: e)

    metrics = ScenarioMetrics(
        min_zmp_margin=float(min_margin),
        friction_violations=friction_violations,
        tracking_rms=float(np.sqrt(np.mean(tracking_sq))) if tracking_sq else 0.0,
        solve_ms_mean=float(np.mean(solve_ms)) if solve_ms else 0.0,
        solve_ms_median=float(statistics.median(solve_ms)) if solve_ms else 0.0,
        solve_ms_max=float(np.max(solve_ms)) if solve_ms else 0.0,
        unstable=unstable,
        unstable_t=unstable_t,
        ticks=n_ticks,
        stale_plans=sum(1 for p in plans if p.stale),
    )
    return ScenarioResult(metrics, rows, plans, disturbances)
