"""Independent constraint checks on finished plans.

This module deliberately avoids the matrices built in :mod:`locoforce.problem`:
every check evaluates the plan's trajectories directly and recomputes the
physics from its own formulas (quotient-form zero-moment point, explicit foot
contact force for friction).  It is the second route used to confirm that
solved plans actually satisfy the original constraints.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contacts import ManipContact, SupportPolygon
from .planner import BASELINE, Plan
from .problem import RobotParams
from .splines import sample_times


def zmp_point(r: np.ndarray, a: np.ndarray, f_m: np.ndarray, params: RobotParams,
              arm_offset: np.ndarray, normal: np.ndarray | None = None) -> np.ndarray:
    """Zero-moment point via the moment/force quotient.

    ``f_m`` is the force acting on the robot at the end-effector;
    ``arm_offset`` is the world-frame offset from the center of mass to the
    contact point.  Raises ``ZeroDivisionError`` when the vertical load
    vanishes.
    """
    n = normal if normal is not None else np.array([0.0, 0.0, 1.0])
    g_vec = params.gravity_vec
    f = params.mass * (g_vec - a) + f_m
    tau = np.cross(r, params.mass * (g_vec - a)) + np.cross(r + arm_offset, f_m)
    denom = float(n @ f)
    if abs(denom) < 1e-9:
        raise ZeroDivisionError("vanishing vertical load in zero-moment point")
    return np.cross(n, tau) / denom


@dataclass
class PlanReport:
    """Worst-case residuals per constraint family, over all sample times."""

    junction_pos: float = 0.0
    junction_vel: float = 0.0
    initial_pos: float = 0.0
    initial_vel: float = 0.0
    zmp_residual: float = -np.inf      # multiplied-through rows, <= 0 feasible
    zmp_margin: float = np.inf         # distance inside the raw polygon, > 0 ok
    friction_slack: float = -np.inf    # row value minus bound, <= 0 feasible
    free_axis_force: float = 0.0
    torque_excess: float = -np.inf
    box_excess: float = -np.inf
    low_load: bool = False
    details: dict = field(default_factory=dict)

    def ok(self, tol_eq: float = 1e-8, tol_ineq: float = 1e-6) -> bool:
        return (self.junction_pos <= tol_eq and self.junction_vel <= tol_eq
                and self.initial_pos <= tol_eq and self.initial_vel <= tol_eq
                and self.zmp_residual <= tol_ineq
                and self.friction_slack <= tol_ineq
                and self.free_axis_force <= tol_eq
                and self.torque_excess <= tol_ineq
                and self.box_excess <= tol_ineq
                and not self.low_load)


def check_plan(plan: Plan, params: RobotParams, contact: ManipContact) -> PlanReport:
    """Re-derive every constraint of a plan from scratch and report residuals."""
    report = PlanReport()
    motion, force = plan.motion, plan.force
    include_force = plan.mode != BASELINE
    arm_offset = params.rotation @ contact.r_cm
    n_up = np.array([0.0, 0.0, 1.0])
    mu, m, g = params.friction, params.mass, params.gravity

    # junctions
    for left, right in zip(motion.pieces, motion.pieces[1:]):
        t = left.tf
        report.junction_pos = max(report.junction_pos,
                                  float(np.linalg.norm(left.eval(t, 0) - right.eval(t, 0))))
        report.junction_vel = max(report.junction_vel,
                                  float(np.linalg.norm(left.eval(t, 1) - right.eval(t, 1))))

    # initial point
    t0 = motion.start
    report.initial_pos = float(np.linalg.norm(motion.eval(t0, 0) - plan.r_meas))
    report.initial_vel = float(np.linalg.norm(motion.eval(t0, 1) - plan.v_meas))

    # per-sample physics on the motion schedule
    for i, piece in enumerate(motion.pieces):
        poly: SupportPolygon = plan.support.polygons[i]
        raw_edges = None
        for t in sample_times(piece.t0, piece.tf):
            r = piece.eval(t, 0)
            a = piece.eval(t, 2)
            f_m = force.eval(min(t, force.end), 0) if include_force else np.zeros(3)

            f_env = params.mass * (params.gravity_vec - a) + f_m
            load = -float(n_up @ f_env)
            if load <= 0.1 * m * g:
                report.low_load = True
                continue
            zmp = zmp_point(r, a, f_m, params, arm_offset, poly.normal)
            vals = poly.halfspaces[:, :2] @ zmp[:2] + poly.halfspaces[:, 2]
            report.zmp_residual = max(report.zmp_residual, float(vals.max() * load))
            report.zmp_margin = min(report.zmp_margin, poly.boundary_distance(zmp))

            # foot contact force must stay in the friction pyramid
            f_foot = m * a - m * params.gravity_vec - f_m
            for axis in (0, 1):
                for s in (1.0, -1.0):
                    report.friction_slack = max(
                        report.friction_slack,
                        float(s * f_foot[axis] - mu * f_foot[2]))

    # force-side checks on the force schedule
    for piece in force.pieces:
        for t in sample_times(piece.t0, piece.tf):
            f_m = piece.eval(t, 0)
            for axis, is_free in enumerate(contact.free_mask):
                if is_free:
                    report.free_axis_force = max(report.free_axis_force, abs(float(f_m[axis])))
            torque = contact.jacobian @ f_m
            report.torque_excess = max(report.torque_excess,
                                       float((torque - contact.tau_lim).max()))
            report.box_excess = max(report.box_excess,
                                    float((f_m - contact.f_hi).max()),
                                    float((contact.f_lo - f_m).max()))
    return report
