"""Joint center-of-mass motion and end-effector force planning for legged
robots, with a receding-horizon SQP solver, a point-mass surrogate simulator
and scenario tooling."""

from .contacts import (ForceEvent, ForceSchedule, GaitParams, GeometryError,
                       ManipContact, ScheduleError, SupportPolygon,
                       SupportSequence, generate_support_sequence,
                       polygon_halfspaces)
from .planner import (BASELINE, FULL, Plan, PlanningError, RobotState,
                      TaskSpec, plan_once, sample_plan, shift_previous)
from .problem import (AssemblyError, CostWeights, DecisionLayout, LowLoadError,
                      PlannerProblem, RobotParams)
from .sim import (Disturbance, ScenarioMetrics, ScenarioResult, ScenarioSetup,
                  SimState, run_scenario, step)
from .solver import (INFEASIBLE, MAX_ITER, NUMERICAL_FAILURE, OPTIMAL,
                     QpProblem, SolveResult, SolverOptions, solve_nlp,
                     solve_qp)
from .splines import (DomainError, PiecewiseTrajectory, Spline3, accel_gram,
                      basis_row, sample_times)
from .validation import PlanReport, check_plan, zmp_point

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "BASELINE", "CostWeights", "DecisionLayout",
    "Disturbance", "DomainError", "FULL", "ForceEvent", "ForceSchedule",
    "GaitParams", "GeometryError", "INFEASIBLE", "LowLoadError", "MAX_ITER",
    "ManipContact", "NUMERICAL_FAILURE", "OPTIMAL", "PiecewiseTrajectory",
    "Plan", "PlanReport", "PlannerProblem", "PlanningError", "QpProblem",
    "RobotParams", "RobotState", "ScenarioMetrics", "ScenarioResult",
    "ScenarioSetup", "ScheduleError", "SimState", "SolveResult",
    "SolverOptions", "Spline3", "SupportPolygon", "SupportSequence",
    "TaskSpec", "accel_gram", "basis_row", "check_plan",
    "generate_support_sequence", "plan_once", "polygon_halfspaces",
    "run_scenario", "sample_plan", "sample_times", "shift_previous",
    "solve_nlp", "solve_qp", "step", "zmp_point",
]
