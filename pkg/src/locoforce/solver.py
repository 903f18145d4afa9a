"""Dense active-set QP solver and the SQP loop wrapped around it.

Problems here are small (tens to low hundreds of variables) and solved over
and over with slowly moving data, so a dense active-set method that accepts a
warm working set beats interior-point approaches: the active set barely
changes between consecutive receding-horizon solves.  Everything is plain
numpy and fully deterministic.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverOptions:
    max_sqp_iters: int = 15
    max_qp_iters: int = 200
    constraint_tol: float = 1e-6
    kkt_tol: float = 1e-6
    step_tol: float = 1e-5
    backtrack_factor: float = 0.5
    merit_penalty: float = 10.0

    def __post_init__(self) -> None:
        for name in ("max_sqp_iters", "max_qp_iters", "constraint_tol",
                     "kkt_tol", "step_tol", "backtrack_factor", "merit_penalty"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class QpProblem:
    """min 0.5 x'Qx + b'x  s.t.  A_eq x = rhs_eq,  G x <= h,  lb <= x <= ub."""

    Q: np.ndarray
    b: np.ndarray
    A_eq: np.ndarray | None = None
    rhs_eq: np.ndarray | None = None
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None


@dataclass
class SolveResult:
    status: str
    x: np.ndarray
    iterations: int
    kkt_residual: float
    solve_time: float
    active_set: tuple = ()
    qp_iterations: int = 0
    eq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ineq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _fold_bounds(qp: QpProblem):
    """Fold finite box bounds into extra inequality rows."""
    n = qp.Q.shape[0]
    G = qp.G if qp.G is not None else np.zeros((0, n))
    h = qp.h if qp.h is not None else np.zeros(0)
    rows, rhs = [G], [h]
    for bound, sign in ((qp.ub, 1.0), (qp.lb, -1.0)):
        if bound is None:
            continue
        for i, v in enumerate(np.asarray(bound, dtype=float)):
            if np.isfinite(v):
                row = np.zeros(n)
                row[i] = sign
                rows.append(row[None, :])
                rhs.append(np.array([sign * v]))
    return np.vstack(rows), np.concatenate(rhs)


def _independent_eq_rows(A: np.ndarray, tol: float = 1e-10):
    """Indices of a maximal linearly independent subset of rows.

    Modified Gram-Schmidt against the orthonormal basis of kept rows.
    """
    keep: list[int] = []
    basis = np.zeros((A.shape[0], A.shape[1]))
    nb = 0
    for i, row in enumerate(A):
        resid = row - basis[:nb].T @ (basis[:nb] @ row) if nb else row.copy()
        norm = np.linalg.norm(resid)
        if norm > tol * max(1.0, np.linalg.norm(row)):
            keep.append(i)
            basis[nb] = resid / norm
            nb += 1
    return keep


def _kkt_solve(Q, b, A, rhs):
    n = Q.shape[0]
    m = A.shape[0]
    K = np.zeros((n + m, n + m))
    K[:n, :n] = Q
    if m:
        K[:n, n:] = A.T
        K[n:, :n] = A
    r = np.concatenate([-b, rhs])
    try:
        sol = np.linalg.solve(K, r)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(K, r, rcond=None)
    ok = np.linalg.norm(K @ sol - r) <= 1e-7 * max(1.0, np.linalg.norm(r))
    return sol[:n], sol[n:], ok


def _kkt_residual(qp: QpProblem, A_eq, rhs_eq, G, h, x, nu, lam, active) -> float:
    grad = qp.Q @ x + qp.b
    if A_eq.shape[0]:
        grad = grad + A_eq.T @ nu
    lam_full = np.zeros(G.shape[0])
    lam_full[list(active)] = lam
    if G.shape[0]:
        grad = grad + G.T @ lam_full
    res = float(np.abs(grad).max()) if grad.size else 0.0
    if A_eq.shape[0]:
        res = max(res, float(np.abs(A_eq @ x - rhs_eq).max()))
    if G.shape[0]:
        slack = G @ x - h
        res = max(res, float(np.maximum(slack, 0.0).max()))
        res = max(res, float(np.abs(lam_full * slack).max()))
    return res


def solve_qp(qp: QpProblem, warm_active_set=None,
             opts: SolverOptions | None = None,
             eq_independent: bool = False) -> SolveResult:
    """Active-set solve of a convex QP.

    Starts from the equality-constrained optimum under the working set and
    alternates dropping constraints with negative multipliers and adding the
    most violated one.  Falls back to a smallest-index (Bland) rule if a
    working set repeats.  ``eq_independent`` skips the equality-rank check
    when the caller has already reduced the rows (SQP resolves).
    """
    opts = opts or SolverOptions()
    t_start = time.perf_counter()
    n = qp.Q.shape[0]
    G, h = _fold_bounds(qp)
    m_ineq = G.shape[0]

    A_eq = qp.A_eq if qp.A_eq is not None else np.zeros((0, n))
    rhs_eq = qp.rhs_eq if qp.rhs_eq is not None else np.zeros(0)
    if A_eq.shape[0] and not eq_independent:
        keep = _independent_eq_rows(A_eq)
        if len(keep) < A_eq.shape[0]:
            x_ls, *_ = np.linalg.lstsq(A_eq, rhs_eq, rcond=None)
            if np.abs(A_eq @ x_ls - rhs_eq).max() > 1e-8:
                return SolveResult(INFEASIBLE, np.zeros(n), 0, np.inf,
                                   time.perf_counter() - t_start)
            A_eq, rhs_eq = A_eq[keep], rhs_eq[keep]

    active: list[int] = []
    if warm_active_set:
        active = sorted(i for i in warm_active_set if 0 <= i < m_ineq)

    visited: set[tuple] = set()
    bland = False
    x = np.zeros(n)
    nu = np.zeros(A_eq.shape[0])
    lam = np.zeros(0)
    status = MAX_ITER
    iters = 0

    for iters in range(1, opts.max_qp_iters + 1):
        key = tuple(active)
        if key in visited:
            if bland:
                status = NUMERICAL_FAILURE
                break
            bland = True
            visited.clear()
        visited.add(key)

        A_work = np.vstack([A_eq, G[active]]) if (A_eq.shape[0] or active) else np.zeros((0, n))
        rhs_work = np.concatenate([rhs_eq, h[active]])
        x, mults, ok = _kkt_solve(qp.Q, qp.b, A_work, rhs_work)
        if not ok and active:
            # the last added row made the working set inconsistent; drop it
            active.pop()
            continue
        if not ok:
            status = NUMERICAL_FAILURE
            break
        nu = mults[:A_eq.shape[0]]
        lam = mults[A_eq.shape[0]:]

        if lam.size and lam.min() < -1e-9:
            if bland:
                drop = next(k for k, v in enumerate(lam) if v < -1e-9)
            else:
                drop = int(np.argmin(lam))
            active.pop(drop)
            continue

        if m_ineq:
            slack = G @ x - h
            slack[active] = 0.0
            worst = float(slack.max())
            if worst > 1e-9:
                if bland:
                    add = next(k for k, v in enumerate(slack) if v > 1e-9)
                else:
                    add = int(np.argmax(slack))
                active.append(add)
                active.sort()
                continue
        status = OPTIMAL
        break

    kkt = _kkt_residual(qp, A_eq, rhs_eq, G, h, x, nu, lam, active)
    if status in (MAX_ITER, NUMERICAL_FAILURE):
        feas_viol = 0.0
        if m_ineq:
            feas_viol = float(np.maximum(G @ x - h, 0.0).max())
        if A_eq.shape[0]:
            feas_viol = max(feas_viol, float(np.abs(A_eq @ x - rhs_eq).max()))
        if feas_viol > opts.constraint_tol:
            status = INFEASIBLE
    if status == OPTIMAL and kkt > opts.kkt_tol:
        status = NUMERICAL_FAILURE
    return SolveResult(status, x, iters, kkt, time.perf_counter() - t_start,
                       active_set=tuple(active), qp_iterations=iters,
                       eq_multipliers=nu, ineq_multipliers=lam)


def _merit(problem, x, rho) -> float:
    val = problem.cost.value(x)
    viol = 0.0
    if problem.eq.A.shape[0]:
        viol += float(np.abs(problem.eq.A @ x - problem.eq.rhs).sum())
    if problem.ineq.G.shape[0]:
        viol += float(np.maximum(problem.ineq.G @ x - problem.ineq.h, 0.0).sum())
    for con in problem.nonlinear:
        viol += float(np.maximum(con.residual(x), 0.0).sum())
    return val + rho * viol


def solve_nlp(problem, x0: np.ndarray, opts: SolverOptions | None = None,
              warm_active_set=None) -> SolveResult:
    """SQP with an l1 merit line search.

    The cost is exactly quadratic; only the tipping rows are nonlinear, so
    each iteration re-linearizes them at the current iterate and solves one
    QP, warm-started with the previous active set.
    """
    opts = opts or SolverOptions()
    t_start = time.perf_counter()
    x = np.asarray(x0, dtype=float).copy()
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite initial guess")

    n_lin = problem.ineq.G.shape[0]
    if not problem.nonlinear:
        qp = QpProblem(problem.cost.Q, problem.cost.b,
                       problem.eq.A, problem.eq.rhs,
                       problem.ineq.G, problem.ineq.h)
        res = solve_qp(qp, warm_active_set=warm_active_set, opts=opts)
        return SolveResult(res.status, res.x, 1, res.kkt_residual,
                           time.perf_counter() - t_start,
                           active_set=res.active_set,
                           qp_iterations=res.qp_iterations,
                           eq_multipliers=res.eq_multipliers,
                           ineq_multipliers=res.ineq_multipliers)

    # reduce the (fixed) equality system once for all SQP iterations
    A_eq = problem.eq.A if problem.eq.A.shape[0] else None
    rhs_eq = problem.eq.rhs if problem.eq.A.shape[0] else None
    if A_eq is not None:
        keep = _independent_eq_rows(A_eq)
        if len(keep) < A_eq.shape[0]:
            x_ls, *_ = np.linalg.lstsq(A_eq, rhs_eq, rcond=None)
            if np.abs(A_eq @ x_ls - rhs_eq).max() > 1e-8:
                return SolveResult(INFEASIBLE, x, 0, np.inf,
                                   time.perf_counter() - t_start)
            A_eq, rhs_eq = A_eq[keep], rhs_eq[keep]

    # project the initial guess onto the equality manifold; line-search
    # iterates are convex combinations of x and QP solutions, so equalities
    # then hold exactly at every iterate instead of merely decaying
    if A_eq is not None:
        resid = rhs_eq - A_eq @ x
        if np.abs(resid).max() > 1e-14:
            corr, *_ = np.linalg.lstsq(A_eq, resid, rcond=None)
            x = x + corr

    active = warm_active_set
    rho = opts.merit_penalty
    total_qp = 0
    last = None
    status = MAX_ITER
    iters = 0

    for iters in range(1, opts.max_sqp_iters + 1):
        blocks_G = [problem.ineq.G]
        blocks_h = [problem.ineq.h]
        for con in problem.nonlinear:
            res = con.residual(x)
            jac = con.jacobian(x)
            blocks_G.append(jac)
            blocks_h.append(jac @ x - res)
        G = np.vstack(blocks_G)
        h = np.concatenate(blocks_h)

        qp = QpProblem(problem.cost.Q, problem.cost.b, A_eq, rhs_eq, G, h)
        res = solve_qp(qp, warm_active_set=active, opts=opts, eq_independent=True)
        total_qp += res.qp_iterations
        if res.status == INFEASIBLE or res.status == NUMERICAL_FAILURE:
            # relax the linearized nonlinear rows so the current iterate is
            # admissible for them, then retry once
            h_relaxed = h.copy()
            if h.shape[0] > n_lin:
                cur = G[n_lin:] @ x
                h_relaxed[n_lin:] = np.maximum(h[n_lin:], cur + 1e-9)
            res = solve_qp(QpProblem(problem.cost.Q, problem.cost.b,
                                     A_eq, rhs_eq, G, h_relaxed),
                           warm_active_set=active, opts=opts, eq_independent=True)
            total_qp += res.qp_iterations
            if res.status != OPTIMAL:
                status = INFEASIBLE
                last = res
                break
        active = res.active_set
        last = res

        step = res.x - x
        step_norm = float(np.abs(step).max()) if step.size else 0.0
        viol = problem.violation(x)
        if step_norm <= opts.step_tol and viol <= opts.constraint_tol:
            status = OPTIMAL
            break

        if res.ineq_multipliers.size:
            rho = max(rho, 2.0 * float(np.abs(res.ineq_multipliers).max()) + 1.0)
        phi0 = _merit(problem, x, rho)
        alpha = 1.0
        accepted = False
        while alpha >= 1e-4:
            x_trial = x + alpha * step
            if _merit(problem, x_trial, rho) <= phi0 - 1e-10 * alpha:
                x = x_trial
                accepted = True
                break
            alpha *= opts.backtrack_factor
        if not accepted:
            # merit stalled; take the full QP step and let the next
            # linearization decide
            x = res.x
        if problem.violation(x) <= opts.constraint_tol and step_norm <= 10 * opts.step_tol:
            status = OPTIMAL
            break

    kkt = last.kkt_residual if last is not None else np.inf
    return SolveResult(status, x, iters, kkt, time.perf_counter() - t_start,
                       active_set=tuple(active or ()), qp_iterations=total_qp,
                       eq_multipliers=last.eq_multipliers if last is not None else np.zeros(0),
                       ineq_multipliers=last.ineq_multipliers if last is not None else np.zeros(0))
