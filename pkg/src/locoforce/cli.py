"""Command-line scenario runner.

Subcommands:

* ``run <config>`` — execute the closed-loop scenario, write the trajectory
  CSV, a metrics JSON and report figures into the output directory.
* ``solve <config>`` — compute a single plan from the initial state and dump
  it as JSON.
* ``check <config> <plan.json>`` — re-validate a dumped plan against every
  constraint, independently of the optimizer.

Exit codes: 0 success, 1 usage/config error, 2 infeasible or unstable outcome.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import sim
from .config import ConfigError, load_setup
from .contacts import SupportPolygon, SupportSequence
from .planner import Plan, PlanningError, RobotState, plan_once
from .problem import RobotParams
from .splines import PiecewiseTrajectory, Spline3
from .validation import check_plan

CSV_HEADER = ("t,rx,ry,rz,vx,vy,vz,ax,ay,az,fx,fy,fz,"
              "zmp_x,zmp_y,margin,solve_ms")


def _write_csv(rows: list, path: str) -> None:
    keys = CSV_HEADER.split(",")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(f"{row[k]:.9g}" for k in keys) + "\n")


def _overrides(args) -> dict:
    out = {}
    if args.mode is not None:
        out["task.mode"] = args.mode
    if args.seed is not None:
        out["sim.seed"] = args.seed
    if args.tick is not None:
        out["sim.tick"] = args.tick / 1000.0
    return out


def _apply_horizon(setup, horizon: float):
    """Rescale the gait phase durations so one cycle spans ``horizon``."""
    gait = setup.gait
    scale = horizon / gait.cycle_duration
    new_gait = dataclasses.replace(
        gait,
        full_support_duration=gait.full_support_duration * scale,
        swing_duration=gait.swing_duration * scale)
    return dataclasses.replace(setup, gait=new_gait)


def _load(args):
    setup, raw, digest = load_setup(args.config, _overrides(args))
    if args.horizon is not None:
        setup = _apply_horizon(setup, args.horizon)
    return setup, raw, digest


def _cmd_run(args) -> int:
    setup, _, digest = _load(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        result = sim.run_scenario(setup)
    except PlanningError as exc:
        print(f"scenario failed: {exc}", file=sys.stderr)
        return 2

    name = os.path.splitext(os.path.basename(args.config))[0]
    _write_csv(result.rows, os.path.join(args.out, f"{name}.csv"))
    metrics = dataclasses.asdict(result.metrics)
    metrics["config_digest"] = digest
    metrics["mode"] = setup.task.mode
    metrics["seed"] = setup.seed
    with open(os.path.join(args.out, f"{name}_metrics.json"), "w",
              encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    from .figures import render_figures
    render_figures(result.rows, args.out, prefix=name)

    m = result.metrics
    print(f"{name}: ticks={m.ticks} min_margin={m.min_zmp_margin:.4f} m "
          f"friction_violations={m.friction_violations} "
          f"solve_ms median={m.solve_ms_median:.2f} max={m.solve_ms_max:.2f}")
    if m.unstable:
        print(f"unstable: support-polygon exit at t={m.unstable_t:.2f} s",
              file=sys.stderr)
        return 2
    return 0


def _initial_plan(setup) -> tuple:
    r0 = np.array([0.0, 0.0, setup.com_height])
    feet = setup.feet_offsets
    f0 = setup.task.force_schedule.value_at(0.0)[0]
    state = RobotState(r=r0, v=np.zeros(3), f_m=f0, feet=feet)
    params = RobotParams(mass=setup.mass, friction=setup.friction,
                         r_meas=r0, v_meas=np.zeros(3), f_meas=f0)
    plan = plan_once(state, setup.task, params, setup.gait,
                     weights=setup.weights, opts=setup.solver_opts)
    return plan, params


def _dump_plan(plan: Plan, setup) -> dict:
    def pieces(traj):
        return [{"t0": p.t0, "tf": p.tf, "coeffs": p.coeffs.tolist()}
                for p in traj.pieces]

    return {
        "mode": plan.mode,
        "t_created": plan.t_created,
        "horizon": plan.horizon,
        "r_meas": plan.r_meas.tolist(),
        "v_meas": plan.v_meas.tolist(),
        "motion": pieces(plan.motion),
        "force": pieces(plan.force),
        "support": [{"t_start": p.t_start, "t_end": p.t_end,
                     "vertices": p.vertices.tolist()}
                    for p in plan.support.polygons],
        "margin": setup.gait.polygon_margin,
        "status": plan.solve_stats.status if plan.solve_stats else None,
        "iterations": plan.solve_stats.iterations if plan.solve_stats else None,
    }


def _restore_plan(data: dict, setup) -> Plan:
    def traj(key):
        return PiecewiseTrajectory(tuple(
            Spline3(np.asarray(p["coeffs"], dtype=float), p["t0"], p["tf"])
            for p in data[key]))

    polys = tuple(SupportPolygon.from_vertices(p["vertices"], p["t_start"],
                                               p["t_end"], data["margin"])
                  for p in data["support"])
    support = SupportSequence(polys, data["horizon"])
    events = setup.task.force_schedule.window(data["t_created"],
                                              data["t_created"] + data["horizon"])
    return Plan(traj("motion"), traj("force"), data["t_created"], data["horizon"],
                support, events, data["mode"],
                np.asarray(data["r_meas"]), np.asarray(data["v_meas"]))


def _cmd_solve(args) -> int:
    setup, _, _ = _load(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        plan, _ = _initial_plan(setup)
    except PlanningError as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return 2
    name = os.path.splitext(os.path.basename(args.config))[0]
    path = os.path.join(args.out, f"{name}_plan.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_dump_plan(plan, setup), fh, indent=2)
        fh.write("\n")
    print(f"plan written to {path} "
          f"(status={plan.solve_stats.status}, "
          f"iterations={plan.solve_stats.iterations})")
    return 0


def _cmd_check(args) -> int:
    setup, _, _ = _load(args)
    with open(args.plan, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    plan = _restore_plan(data, setup)
    f0 = setup.task.force_schedule.value_at(0.0)[0]
    params = RobotParams(mass=setup.mass, friction=setup.friction,
                         r_meas=plan.r_meas, v_meas=plan.v_meas, f_meas=f0)
    report = check_plan(plan, params, setup.task.manip)
    ok = report.ok()
    print(f"junctions pos={report.junction_pos:.2e} vel={report.junction_vel:.2e}")
    print(f"initial   pos={report.initial_pos:.2e} vel={report.initial_vel:.2e}")
    print(f"stability residual={report.zmp_residual:.2e} "
          f"margin={report.zmp_margin:.4f} m")
    print(f"friction  slack={report.friction_slack:.2e}")
    print(f"force     free-axis={report.free_axis_force:.2e} "
          f"torque={report.torque_excess:.2e} box={report.box_excess:.2e}")
    print("OK" if ok else "VIOLATED")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="locoforce",
        description="Joint motion/force receding-horizon planner scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario config file")
        p.add_argument("--mode", choices=["full", "baseline"],
                       help="override the planning mode")
        p.add_argument("--seed", type=int, help="override the simulation seed")
        p.add_argument("--horizon", type=float,
                       help="override the planning horizon [s]")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tick", type=float, help="replanning tick [ms]")

    p_run = sub.add_parser("run", help="run a closed-loop scenario")
    common(p_run)
    p_solve = sub.add_parser("solve", help="solve one plan and dump it")
    common(p_solve)
    p_check = sub.add_parser("check", help="re-validate a dumped plan")
    common(p_check)
    p_check.add_argument("plan", help="plan JSON produced by `solve`")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_check(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
