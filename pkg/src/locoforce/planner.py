"""Receding-horizon planning: schedule generation, warm starts, solve, fallback.

Each call to :func:`plan_once` regenerates the support sequence from the
current stance, slices the force-event schedule to the new horizon, assembles
the optimization problem and solves it warm-started from the time-shifted
previous plan.  A failed solve falls back to the previous plan, re-fitted to
the new schedule and flagged stale; failing with no previous plan is a hard
error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import problem as pb
from .contacts import (ForceSchedule, GaitParams, ManipContact, SupportSequence,
                       generate_support_sequence)
from .solver import OPTIMAL, SolverOptions, SolveResult, solve_nlp
from .splines import DomainError, PiecewiseTrajectory, Spline3, basis_row, sample_times

FULL = "full"
BASELINE = "baseline"


class PlanningError(RuntimeError):
    """No feasible plan and no previous plan to fall back on."""


@dataclass(frozen=True)
class RobotState:
    """Measured state fed to the planner at a replanning instant."""

    r: np.ndarray
    v: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_m: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    feet: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def __post_init__(self) -> None:
        for name in ("r", "v", "a", "f_m", "rotation", "feet"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite {name} in robot state")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class TaskSpec:
    """User task: constant desired velocity, force events, contact, mode."""

    v_des: np.ndarray
    force_schedule: ForceSchedule
    manip: ManipContact
    mode: str = FULL

    def __post_init__(self) -> None:
        if self.mode not in (FULL, BASELINE):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "v_des", np.asarray(self.v_des, dtype=float))


@dataclass(frozen=True)
class Plan:
    """Solved motion and force trajectories over one horizon, plus context.

    Trajectory times are horizon-relative: t=0 is the planning instant
    ``t_created``.  The support sequence, horizon-relative events and the
    state snapshot are kept so a plan can be re-validated from scratch.
    """

    motion: PiecewiseTrajectory
    force: PiecewiseTrajectory
    t_created: float
    horizon: float
    support: SupportSequence
    events: ForceSchedule
    mode: str
    r_meas: np.ndarray
    v_meas: np.ndarray
    solve_stats: SolveResult | None = None
    stale: bool = False


def sample_plan(plan: Plan, t: float):
    """Evaluate (r, v, a, f_m) at horizon-relative time ``t``."""
    if t < -1e-9 or t > plan.horizon + 1e-9:
        raise DomainError(f"t={t} outside plan horizon [0, {plan.horizon}]")
    t = min(max(t, plan.motion.start), plan.motion.end)
    return (plan.motion.eval(t, 0), plan.motion.eval(t, 1),
            plan.motion.eval(t, 2), plan.force.eval(t, 0))


def _eval_clamped(traj: PiecewiseTrajectory, t: float, deriv: int,
                  motion_like: bool) -> np.ndarray:
    """Evaluate with constant-velocity (motion) or constant-value (force)
    extrapolation past the trajectory end."""
    if t <= traj.end:
        return traj.eval(t, deriv)
    dt = t - traj.end
    if motion_like:
        if deriv == 0:
            return traj.eval(traj.end, 0) + dt * traj.eval(traj.end, 1)
        if deriv == 1:
            return traj.eval(traj.end, 1)
        return np.zeros(3)
    return traj.eval(traj.end, 0) if deriv == 0 else np.zeros(3)


def _fit_spline(domain, sampler) -> np.ndarray:
    """Fit (3, 6) coefficients to a callable ``sampler(t, deriv) -> 3-vector``."""
    ts = sample_times(*domain)
    rows = np.vstack([basis_row(t, d) for t in ts for d in (0, 1, 2)])
    coeffs = np.empty((3, 6))
    targets = np.array([sampler(t, d) for t in ts for d in (0, 1, 2)])
    for axis in range(3):
        coeffs[axis], *_ = np.linalg.lstsq(rows, targets[:, axis], rcond=None)
    return coeffs


def shift_previous(previous: Plan, t_d: float, motion_domains, force_domains):
    """Warm-start vector: the previous plan re-fit to a new schedule.

    Samples the previous trajectories at the new sample times shifted by
    ``t_d`` and least-squares fits fresh coefficients per spline and axis.
    Returns ``None`` (cold-start signal) when ``t_d`` exceeds the previous
    horizon.
    """
    if t_d < 0:
        raise ValueError("t_d must be non-negative")
    if t_d > previous.horizon + 1e-9:
        return None
    layout = pb.DecisionLayout(len(motion_domains), len(force_domains))
    x0 = np.empty(layout.size)
    for kind, domains, traj, motion_like in (
            ("motion", motion_domains, previous.motion, True),
            ("force", force_domains, previous.force, False)):
        for i, domain in enumerate(domains):
            coeffs = _fit_spline(domain, lambda t, d: _eval_clamped(traj, t + t_d, d, motion_like))
            block = layout.motion_block(i) if kind == "motion" else layout.force_block(i)
            x0[block] = coeffs.reshape(-1)
    return x0


def _cold_start(layout: pb.DecisionLayout, motion_domains, force_domains,
                desired: pb.DesiredMotion, events: ForceSchedule) -> np.ndarray:
    x0 = np.empty(layout.size)
    for i, domain in enumerate(motion_domains):
        coeffs = _fit_spline(domain, lambda t, d: (desired.pos, desired.vel, desired.acc)[d](t))
        x0[layout.motion_block(i)] = coeffs.reshape(-1)
    for j, domain in enumerate(force_domains):
        coeffs = _fit_spline(domain, lambda t, d: events.value_at(min(t, events.end))[d])
        x0[layout.force_block(j)] = coeffs.reshape(-1)
    return x0


def _trajectories(layout: pb.DecisionLayout, x: np.ndarray,
                  motion_domains, force_domains):
    motion = PiecewiseTrajectory(tuple(
        Spline3(x[layout.motion_block(i)].reshape(3, 6), t0, tf)
        for i, (t0, tf) in enumerate(motion_domains)))
    force = PiecewiseTrajectory(tuple(
        Spline3(x[layout.force_block(j)].reshape(3, 6), t0, tf)
        for j, (t0, tf) in enumerate(force_domains)))
    return motion, force


def build_problem(state: RobotState, task: TaskSpec, support: SupportSequence,
                  events: ForceSchedule, params: pb.RobotParams,
                  weights: pb.CostWeights,
                  previous: Plan | None = None, t_d: float = 0.0):
    """Assemble the full planner problem for one horizon."""
    motion_domains = support.domains()
    force_domains = [(ev.t0, ev.tf) for ev in events.events]
    layout = pb.DecisionLayout(len(motion_domains), len(force_domains))
    include_force = task.mode == FULL

    desired = pb.DesiredMotion(state.r, task.v_des)
    costs = [
        pb.task_tracking_cost(layout, motion_domains, desired, force_domains, events, weights),
        pb.initial_match_cost(layout, motion_domains, force_domains,
                              state.a, state.f_m, weights),
        pb.min_accel_cost(layout, motion_domains, weights),
    ]
    if previous is not None and t_d <= previous.horizon:
        costs.append(pb.deviation_cost(layout, motion_domains, force_domains,
                                       previous.motion, previous.force, t_d, weights))

    eqs = [pb.initial_point_eqs(layout, motion_domains, state.r, state.v)]
    junctions = pb.junction_eqs(layout, motion_domains)
    if junctions.A.shape[0]:
        eqs.append(junctions)
    free = pb.free_motion_eqs(layout, task.manip.free_mask)
    if free.A.shape[0]:
        eqs.append(free)
    if task.mode == BASELINE:
        eqs.append(pb.pin_force_eqs(layout, force_domains, events))

    ineqs = [
        pb.friction_pyramid_ineqs(layout, params, motion_domains, force_domains,
                                  include_force=include_force),
        pb.force_limit_ineqs(layout, task.manip, force_domains),
    ]
    zmp = pb.ZmpConstraint(layout, params, task.manip, motion_domains,
                           force_domains, support, include_force=include_force)

    prob = pb.assemble(layout, costs, eqs, ineqs, [zmp], motion_domains, force_domains)
    return prob, desired


def plan_once(state: RobotState, task: TaskSpec, params: pb.RobotParams,
              gait: GaitParams, weights: pb.CostWeights | None = None,
              opts: SolverOptions | None = None,
              previous: Plan | None = None, now: float = 0.0) -> Plan:
    """Compute one receding-horizon plan at wall time ``now``."""
    weights = weights or pb.CostWeights()
    opts = opts or SolverOptions()

    support = generate_support_sequence(state.feet, task.v_des, gait, v_actual=state.v)
    horizon = support.cycle_duration
    events = task.force_schedule.window(now, now + horizon)
    t_d = now - previous.t_created if previous is not None else 0.0

    prob, desired = build_problem(state, task, support, events, params, weights,
                                  previous=previous, t_d=t_d)
    layout = prob.layout

    x0 = None
    warm_active = None
    if previous is not None:
        x0 = shift_previous(previous, t_d, prob.motion_domains, prob.force_domains)
        stats = previous.solve_stats
        if (x0 is not None and stats is not None and not previous.stale
                and stats.x.shape[0] == layout.size):
            warm_active = stats.active_set
    if x0 is None:
        x0 = _cold_start(layout, prob.motion_domains, prob.force_domains, desired, events)

    result = solve_nlp(prob, x0, opts, warm_active_set=warm_active)
    accepted = (result.status == OPTIMAL
                and prob.violation(result.x) <= opts.constraint_tol * 10)
    if accepted:
        motion, force = _trajectories(layout, result.x, prob.motion_domains,
                                      prob.force_domains)
        return Plan(motion, force, now, horizon, support, events, task.mode,
                    state.r.copy(), state.v.copy(), solve_stats=result)

    if previous is None:
        raise PlanningError(f"planning failed with status {result.status!r} "
                            "and no previous plan to fall back on")
    x_stale = shift_previous(previous, t_d, prob.motion_domains, prob.force_domains)
    if x_stale is None:
        raise PlanningError("previous plan exhausted; cannot fall back")
    motion, force = _trajectories(layout, x_stale, prob.motion_domains, prob.force_domains)
    return Plan(motion, force, now, horizon, support, events, task.mode,
                state.r.copy(), state.v.copy(), solve_stats=result, stale=True)
