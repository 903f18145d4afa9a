"""Assembly of the quadratic cost and constraints over stacked spline coefficients.

The decision vector stacks 18 coefficients (3 axes x 6) per motion spline
followed by 18 per force spline.  Costs use the convention
``cost(x) = 0.5 * x @ Q @ x + b @ x``, so a weighted least-squares term
``w * ||R x - y||^2`` contributes ``Q += 2 w R^T R`` and ``b -= 2 w R^T y``.

Sign conventions: gravity is ``(0, 0, -g)``; the planned manipulation force is
the force the environment exerts on the robot at the end-effector (holding a
payload gives a negative z component).  The tipping constraint is kept in a
denominator-free form: with the upward net ground load
``f = m*(a - g_vec) - f_m`` and moment ``tau = r x m*(a - g_vec) - p x f_m``
about the origin, each support edge ``(a_k, b_k, c_k)`` must satisfy
``a_k*(n x tau)_x + b_k*(n x tau)_y + c_k*(n . f) <= 0``, which equals the
classical zero-moment-point test whenever ``n . f > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contacts import GRAVITY, ForceSchedule, ManipContact, SupportPolygon
from .splines import PiecewiseTrajectory, basis_row, sample_times

COEFFS_PER_SPLINE = 18  # 3 axes x 6 coefficients


class AssemblyError(ValueError):
    """Mismatched layouts or dimensions while assembling the problem."""


class LowLoadError(RuntimeError):
    """Net vertical load too small for the tipping constraint to be meaningful."""


@dataclass(frozen=True)
class DecisionLayout:
    """Block layout of the stacked (motion, force) coefficient vector."""

    n_motion: int
    n_force: int

    def __post_init__(self) -> None:
        if self.n_motion < 1 or self.n_force < 1:
            raise AssemblyError("need at least one motion and one force spline")

    @property
    def size(self) -> int:
        return COEFFS_PER_SPLINE * (self.n_motion + self.n_force)

    def motion_block(self, i: int) -> slice:
        if not 0 <= i < self.n_motion:
            raise AssemblyError(f"motion spline index {i} out of range")
        return slice(COEFFS_PER_SPLINE * i, COEFFS_PER_SPLINE * (i + 1))

    def force_block(self, j: int) -> slice:
        if not 0 <= j < self.n_force:
            raise AssemblyError(f"force spline index {j} out of range")
        start = COEFFS_PER_SPLINE * (self.n_motion + j)
        return slice(start, start + COEFFS_PER_SPLINE)

    def stacked_basis(self, kind: str, idx: int, t: float, deriv: int = 0) -> np.ndarray:
        """(3, N) sampling matrix: row per axis with the basis in that block."""
        row = basis_row(t, deriv)
        out = np.zeros((3, self.size))
        block = self.motion_block(idx) if kind == "motion" else self.force_block(idx)
        for axis in range(3):
            start = block.start + 6 * axis
            out[axis, start:start + 6] = row
        return out


@dataclass
class QuadCost:
    Q: np.ndarray
    b: np.ndarray

    @classmethod
    def zeros(cls, layout: DecisionLayout) -> "QuadCost":
        n = layout.size
        return cls(np.zeros((n, n)), np.zeros(n))

    def add_residual(self, rows: np.ndarray, target: np.ndarray, weight: float) -> None:
        """Accumulate ``weight * ||rows @ x - target||^2``."""
        if weight == 0.0:
            return
        self.Q += 2.0 * weight * rows.T @ rows
        self.b -= 2.0 * weight * rows.T @ np.asarray(target, dtype=float)

    def add(self, other: "QuadCost") -> None:
        self.Q += other.Q
        self.b += other.b

    def value(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.Q @ x + self.b @ x)


@dataclass
class LinearEq:
    A: np.ndarray
    rhs: np.ndarray

    @classmethod
    def empty(cls, layout: DecisionLayout) -> "LinearEq":
        return cls(np.zeros((0, layout.size)), np.zeros(0))

    @classmethod
    def stack(cls, parts) -> "LinearEq":
        parts = list(parts)
        return cls(np.vstack([p.A for p in parts]), np.concatenate([p.rhs for p in parts]))


@dataclass
class LinearIneq:
    G: np.ndarray
    h: np.ndarray

    @classmethod
    def empty(cls, layout: DecisionLayout) -> "LinearIneq":
        return cls(np.zeros((0, layout.size)), np.zeros(0))

    @classmethod
    def stack(cls, parts) -> "LinearIneq":
        parts = list(parts)
        return cls(np.vstack([p.G for p in parts]), np.concatenate([p.h for p in parts]))


@dataclass(frozen=True)
class RobotParams:
    """Whole-body parameters and the measured state at planning time."""

    mass: float
    friction: float
    r_meas: np.ndarray
    v_meas: np.ndarray
    a_meas: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_meas: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    gravity: float = GRAVITY

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not 0 < self.friction <= 1.5:
            raise ValueError("friction coefficient out of range (0, 1.5]")
        rot = np.asarray(self.rotation, dtype=float)
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-8:
            raise ValueError("rotation matrix is not orthonormal")
        for name in ("r_meas", "v_meas", "a_meas", "f_meas"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "rotation", rot)

    @property
    def gravity_vec(self) -> np.ndarray:
        return np.array([0.0, 0.0, -self.gravity])


@dataclass(frozen=True)
class CostWeights:
    """Scalar weights of the quadratic cost terms.

    Motion and force tracking are weighted separately: positions are meters
    while forces are newtons, so a shared weight would make force deviations
    dominate every trade-off.
    """

    track_value: float = 10.0
    track_rate: float = 1.0
    track_accel: float = 0.1
    force_value: float = 10.0
    force_rate: float = 1.0
    force_accel: float = 0.1
    deviation: float = 1.0
    force_deviation: float = 1.0
    initial_match: float = 100.0
    initial_force_match: float = 100.0
    min_accel: float = 1e-3


@dataclass(frozen=True)
class DesiredMotion:
    """Constant-velocity reference integrated from the measured position."""

    r0: np.ndarray
    v_des: np.ndarray

    def pos(self, t: float) -> np.ndarray:
        return np.asarray(self.r0) + np.asarray(self.v_des) * t

    def vel(self, t: float) -> np.ndarray:
        return np.asarray(self.v_des, dtype=float)

    def acc(self, t: float) -> np.ndarray:
        return np.zeros(3)


def _owning_index(domains, t: float) -> int:
    # half-open lookup; final domain closed
    for i, (t0, tf) in enumerate(domains[:-1]):
        if t0 - 1e-9 <= t < tf:
            return i
    t0, tf = domains[-1]
    if t0 - 1e-9 <= t <= tf + 1e-9:
        return len(domains) - 1
    raise AssemblyError(f"t={t} outside spline domains")


def task_tracking_cost(layout: DecisionLayout, motion_domains, desired: DesiredMotion,
                       force_domains, events: ForceSchedule,
                       weights: CostWeights) -> QuadCost:
    """Least-squares tracking of the desired motion and force-event profiles."""
    cost = QuadCost.zeros(layout)
    for i, (t0, tf) in enumerate(motion_domains):
        for t in sample_times(t0, tf):
            cost.add_residual(layout.stacked_basis("motion", i, t, 0), desired.pos(t), weights.track_value)
            cost.add_residual(layout.stacked_basis("motion", i, t, 1), desired.vel(t), weights.track_rate)
            cost.add_residual(layout.stacked_basis("motion", i, t, 2), desired.acc(t), weights.track_accel)
    for j, (t0, tf) in enumerate(force_domains):
        for t in sample_times(t0, tf):
            f, fd, fdd = events.value_at(min(t, events.end))
            cost.add_residual(layout.stacked_basis("force", j, t, 0), f, weights.force_value)
            cost.add_residual(layout.stacked_basis("force", j, t, 1), fd, weights.force_rate)
            cost.add_residual(layout.stacked_basis("force", j, t, 2), fdd, weights.force_accel)
    return cost


def deviation_cost(layout: DecisionLayout, motion_domains, force_domains,
                   prev_motion: PiecewiseTrajectory, prev_force: PiecewiseTrajectory,
                   t_d: float, weights: CostWeights) -> QuadCost:
    """Penalty on drifting away from the time-shifted previous plan.

    Samples whose shifted time falls beyond the previous horizon are skipped.
    """
    if t_d < 0:
        raise ValueError("t_d must be non-negative")
    cost = QuadCost.zeros(layout)
    for kind, domains, prev, w in (
            ("motion", motion_domains, prev_motion, weights.deviation),
            ("force", force_domains, prev_force, weights.force_deviation)):
        for i, (t0, tf) in enumerate(domains):
            for t in sample_times(t0, tf):
                t_prev = t + t_d
                if t_prev > prev.end + 1e-9:
                    continue
                for deriv in (0, 1, 2):
                    cost.add_residual(layout.stacked_basis(kind, i, t, deriv),
                                      prev.eval(min(t_prev, prev.end), deriv), w)
    return cost


def initial_match_cost(layout: DecisionLayout, motion_domains, force_domains,
                       a_meas: np.ndarray, f_meas: np.ndarray,
                       weights: CostWeights) -> QuadCost:
    """Soft anchoring of the initial acceleration and force to measured values."""
    cost = QuadCost.zeros(layout)
    t0_m = motion_domains[0][0]
    t0_f = force_domains[0][0]
    cost.add_residual(layout.stacked_basis("motion", 0, t0_m, 2), a_meas, weights.initial_match)
    cost.add_residual(layout.stacked_basis("force", 0, t0_f, 0), f_meas, weights.initial_force_match)
    return cost


def min_accel_cost(layout: DecisionLayout, motion_domains, weights: CostWeights) -> QuadCost:
    """Integrated squared acceleration per motion spline, closed form."""
    from .splines import accel_gram

    cost = QuadCost.zeros(layout)
    for i, (t0, tf) in enumerate(motion_domains):
        gram = accel_gram(t0, tf)
        block = layout.motion_block(i)
        for axis in range(3):
            start = block.start + 6 * axis
            cost.Q[start:start + 6, start:start + 6] += 2.0 * weights.min_accel * gram
    return cost


def junction_eqs(layout: DecisionLayout, motion_domains) -> LinearEq:
    """Position and velocity continuity between adjacent motion splines."""
    rows, rhs = [], []
    for i in range(layout.n_motion - 1):
        t_join = motion_domains[i][1]
        if abs(t_join - motion_domains[i + 1][0]) > 1e-9:
            raise AssemblyError("motion domains are not contiguous")
        for deriv in (0, 1):
            left = layout.stacked_basis("motion", i, t_join, deriv)
            right = layout.stacked_basis("motion", i + 1, t_join, deriv)
            rows.append(left - right)
            rhs.append(np.zeros(3))
    if not rows:
        return LinearEq.empty(layout)
    return LinearEq(np.vstack(rows), np.concatenate(rhs))


def initial_point_eqs(layout: DecisionLayout, motion_domains,
                      r_meas: np.ndarray, v_meas: np.ndarray) -> LinearEq:
    """Bind the first motion spline's start to the measured position/velocity."""
    t0 = motion_domains[0][0]
    A = np.vstack([layout.stacked_basis("motion", 0, t0, 0),
                   layout.stacked_basis("motion", 0, t0, 1)])
    rhs = np.concatenate([np.asarray(r_meas, dtype=float), np.asarray(v_meas, dtype=float)])
    return LinearEq(A, rhs)


def free_motion_eqs(layout: DecisionLayout, free_mask) -> LinearEq:
    """Zero the full coefficient block of each free axis on every force spline."""
    rows = []
    for j in range(layout.n_force):
        block = layout.force_block(j)
        for axis, free in enumerate(free_mask):
            if not free:
                continue
            for k in range(6):
                row = np.zeros(layout.size)
                row[block.start + 6 * axis + k] = 1.0
                rows.append(row)
    if not rows:
        return LinearEq.empty(layout)
    return LinearEq(np.vstack(rows), np.zeros(len(rows)))


def pin_force_eqs(layout: DecisionLayout, force_domains, events: ForceSchedule) -> LinearEq:
    """Freeze every force spline at the least-squares fit of its event profile.

    Used by the manipulation-blind baseline, which keeps the user-specified
    force trajectory but does not let the optimizer move it.
    """
    rows, rhs = [], []
    for j, (t0, tf) in enumerate(force_domains):
        ts = sample_times(t0, tf)
        basis = np.vstack([basis_row(t, d) for t in ts for d in (0, 1, 2)])
        for axis in range(3):
            targets = np.array([events.value_at(min(t, events.end))[d][axis]
                                for t in ts for d in (0, 1, 2)])
            coeffs, *_ = np.linalg.lstsq(basis, targets, rcond=None)
            block = layout.force_block(j)
            for k in range(6):
                row = np.zeros(layout.size)
                row[block.start + 6 * axis + k] = 1.0
                rows.append(row)
                rhs.append(coeffs[k])
    return LinearEq(np.vstack(rows), np.array(rhs))


def friction_pyramid_ineqs(layout: DecisionLayout, params: RobotParams,
                           motion_domains, force_domains,
                           include_force: bool = True) -> LinearIneq:
    """Four-face friction pyramid rows per sample, in force units.

    Per tangential sign ``s`` and axis: ``s*(m*a_t - f_t) - mu*(m*a_z - f_z)
    <= mu*m*g``, the no-slip condition on the net foot contact force.  The
    baseline drops the manipulation-force terms.
    """
    mu, m, g = params.friction, params.mass, params.gravity
    rows, rhs = [], []
    for i, (t0, tf) in enumerate(motion_domains):
        for t in sample_times(t0, tf):
            acc = layout.stacked_basis("motion", i, t, 2)
            frc = None
            if include_force:
                j = _owning_index(force_domains, t)
                frc = layout.stacked_basis("force", j, t, 0)
            for axis in (0, 1):
                for s in (1.0, -1.0):
                    row = s * m * acc[axis] - mu * m * acc[2]
                    if frc is not None:
                        row = row - s * frc[axis] + mu * frc[2]
                    rows.append(row)
                    rhs.append(mu * m * g)
    return LinearIneq(np.vstack(rows), np.array(rhs))


def force_limit_ineqs(layout: DecisionLayout, contact: ManipContact,
                      force_domains) -> LinearIneq:
    """Arm torque rows and per-axis force box rows at every force sample."""
    rows, rhs = [], []
    for j, (t0, tf) in enumerate(force_domains):
        for t in sample_times(t0, tf):
            frc = layout.stacked_basis("force", j, t, 0)
            torque = contact.jacobian @ frc
            for d in range(torque.shape[0]):
                rows.append(torque[d])
                rhs.append(contact.tau_lim[d])
            for axis in range(3):
                rows.append(frc[axis])
                rhs.append(contact.f_hi[axis])
                rows.append(-frc[axis])
                rhs.append(-contact.f_lo[axis])
    return LinearIneq(np.vstack(rows), np.array(rhs))


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def _cross_rows(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise cross product of (S, 3) arrays (faster than np.cross here)."""
    out = np.empty_like(u)
    out[:, 0] = u[:, 1] * v[:, 2] - u[:, 2] * v[:, 1]
    out[:, 1] = u[:, 2] * v[:, 0] - u[:, 0] * v[:, 2]
    out[:, 2] = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    return out


def _cross_mats(v: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Batched ``skew(v_s) @ M_s`` for v (S, 3) and M (S, 3, N)."""
    out = np.empty_like(M)
    out[:, 0] = v[:, 1, None] * M[:, 2] - v[:, 2, None] * M[:, 1]
    out[:, 1] = v[:, 2, None] * M[:, 0] - v[:, 0, None] * M[:, 2]
    out[:, 2] = v[:, 0, None] * M[:, 1] - v[:, 1, None] * M[:, 0]
    return out


@dataclass(frozen=True)
class _ZmpSample:
    pos: np.ndarray        # (3, N) position sampling matrix
    acc: np.ndarray        # (3, N) acceleration sampling matrix
    frc: np.ndarray | None  # (3, N) force sampling matrix, None for baseline
    edges: np.ndarray      # (k, 3) support half-space rows with margin
    normal: np.ndarray
    t: float


class ZmpConstraint:
    """Denominator-free tipping constraint with an analytic Jacobian.

    Bilinear in the decision vector (position x acceleration, position x
    force); the surrounding solver linearizes it at each iterate.  Sample data
    is stacked into batched arrays so residual and Jacobian evaluation are a
    handful of matrix products (they sit on the SQP line-search hot path).
    """

    def __init__(self, layout: DecisionLayout, params: RobotParams,
                 contact: ManipContact, motion_domains, force_domains,
                 support, include_force: bool = True) -> None:
        self.layout = layout
        self.mass = params.mass
        self.g_vec = params.gravity_vec
        self.arm_offset = params.rotation @ contact.r_cm
        self.min_load = 0.1 * params.mass * params.gravity
        samples = []
        for i, (t0, tf) in enumerate(motion_domains):
            poly = support.polygons[i]
            for t in sample_times(t0, tf):
                frc = None
                if include_force:
                    j = _owning_index(force_domains, t)
                    frc = layout.stacked_basis("force", j, t, 0)
                samples.append(_ZmpSample(
                    pos=layout.stacked_basis("motion", i, t, 0),
                    acc=layout.stacked_basis("motion", i, t, 2),
                    frc=frc,
                    edges=poly.halfspaces,
                    normal=poly.normal,
                    t=t,
                ))
        self.samples = samples
        self.n_rows = sum(s.edges.shape[0] for s in samples)
        self._stack(layout.size)

    def _stack(self, n: int) -> None:
        S = len(self.samples)
        self._pos = np.stack([s.pos for s in self.samples])       # (S, 3, N)
        self._acc = np.stack([s.acc for s in self.samples])
        self._has_force = self.samples[0].frc is not None
        self._frc = (np.stack([s.frc for s in self.samples])
                     if self._has_force else np.zeros((S, 3, n)))
        self._normals = np.stack([s.normal for s in self.samples])  # (S, 3)
        counts = [s.edges.shape[0] for s in self.samples]
        self._edge_sample = np.repeat(np.arange(S), counts)       # (n_rows,)
        self._edges = np.vstack([s.edges for s in self.samples])  # (n_rows, 3)
        # flattened views for single-matmul evaluation of r, a, f per sample
        self._pos_flat = self._pos.reshape(3 * S, n)
        self._acc_flat = self._acc.reshape(3 * S, n)
        self._frc_flat = self._frc.reshape(3 * S, n)

    def _terms(self, x: np.ndarray):
        S = len(self.samples)
        r = (self._pos_flat @ x).reshape(S, 3)
        a = (self._acc_flat @ x).reshape(S, 3)
        f_m = (self._frc_flat @ x).reshape(S, 3)
        w = self.mass * (a - self.g_vec)
        f_net = w - f_m
        p = r + self.arm_offset
        tau = _cross_rows(r, w) - _cross_rows(p, f_m)
        return r, a, f_m, w, f_net, p, tau

    def residual(self, x: np.ndarray) -> np.ndarray:
        _, _, _, _, f_net, _, tau = self._terms(x)
        ntau = _cross_rows(self._normals, tau)
        load = np.einsum("ij,ij->i", self._normals, f_net)
        idx = self._edge_sample
        return (self._edges[:, 0] * ntau[idx, 0]
                + self._edges[:, 1] * ntau[idx, 1]
                + self._edges[:, 2] * load[idx])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        r, _, f_m, w, _, p, _ = self._terms(x)
        mass_acc = self.mass * self._acc
        j_tau = (_cross_mats(r, mass_acc) - _cross_mats(w, self._pos)
                 + _cross_mats(f_m, self._pos))
        j_fnet = mass_acc
        if self._has_force:
            j_tau = j_tau - _cross_mats(p, self._frc)
            j_fnet = j_fnet - self._frc
        j_ntau = _cross_mats(self._normals, j_tau)           # (S, 3, N)
        j_load = np.einsum("sj,sjn->sn", self._normals, j_fnet)
        idx = self._edge_sample
        return (self._edges[:, 0:1] * j_ntau[idx, 0]
                + self._edges[:, 1:2] * j_ntau[idx, 1]
                + self._edges[:, 2:3] * j_load[idx])

    def loads(self, x: np.ndarray) -> np.ndarray:
        """Net vertical load at each sample; used for the validity guard."""
        f_net = self._terms(x)[4]
        return np.einsum("ij,ij->i", self._normals, f_net)


def zmp_residual(layout: DecisionLayout, x: np.ndarray, t: float,
                 polygon: SupportPolygon, params: RobotParams,
                 contact: ManipContact, motion_index: int, force_index: int,
                 include_force: bool = True):
    """Residual and Jacobian of the tipping rows for one sample time.

    Raises :class:`LowLoadError` when the net vertical load drops below 10%
    of the robot's weight, i.e. the constraint's sign equivalence breaks.
    """
    con = ZmpConstraint.__new__(ZmpConstraint)
    con.layout = layout
    con.mass = params.mass
    con.g_vec = params.gravity_vec
    con.arm_offset = params.rotation @ contact.r_cm
    con.min_load = 0.1 * params.mass * params.gravity
    frc = layout.stacked_basis("force", force_index, t, 0) if include_force else None
    con.samples = [_ZmpSample(pos=layout.stacked_basis("motion", motion_index, t, 0),
                              acc=layout.stacked_basis("motion", motion_index, t, 2),
                              frc=frc, edges=polygon.halfspaces,
                              normal=polygon.normal, t=t)]
    con.n_rows = polygon.halfspaces.shape[0]
    con._stack(layout.size)
    load = con.loads(x)[0]
    if load <= con.min_load:
        raise LowLoadError(f"net vertical load {load:.3f} N below guard {con.min_load:.3f} N")
    return con.residual(x), con.jacobian(x)


@dataclass
class PlannerProblem:
    """Assembled optimization problem over the stacked coefficient vector."""

    layout: DecisionLayout
    cost: QuadCost
    eq: LinearEq
    ineq: LinearIneq
    nonlinear: list
    motion_domains: list
    force_domains: list

    def __post_init__(self) -> None:
        n = self.layout.size
        for name, arr in (("Q", self.cost.Q), ("A", self.eq.A), ("G", self.ineq.G)):
            if arr.shape[-1] != n:
                raise AssemblyError(f"{name} has {arr.shape[-1]} columns, layout expects {n}")
            if not np.all(np.isfinite(arr)):
                raise AssemblyError(f"non-finite entries in {name}")
        if len(self.motion_domains) != self.layout.n_motion:
            raise AssemblyError("motion domain count does not match layout")
        if len(self.force_domains) != self.layout.n_force:
            raise AssemblyError("force domain count does not match layout")

    def violation(self, x: np.ndarray) -> float:
        """Worst constraint violation of the original (nonlinear) problem."""
        worst = 0.0
        if self.eq.A.shape[0]:
            worst = max(worst, float(np.abs(self.eq.A @ x - self.eq.rhs).max()))
        if self.ineq.G.shape[0]:
            worst = max(worst, float(np.maximum(self.ineq.G @ x - self.ineq.h, 0.0).max()))
        for con in self.nonlinear:
            res = con.residual(x)
            if res.size:
                worst = max(worst, float(np.maximum(res, 0.0).max()))
        return worst

    def dims(self) -> dict:
        return {
            "variables": self.layout.size,
            "equalities": int(self.eq.A.shape[0]),
            "linear_inequalities": int(self.ineq.G.shape[0]),
            "nonlinear_rows": int(sum(c.n_rows for c in self.nonlinear)),
        }


def assemble(layout: DecisionLayout, costs, eqs, ineqs, nonlinear,
             motion_domains, force_domains) -> PlannerProblem:
    """Sum cost contributions and stack constraint blocks into one problem."""
    total = QuadCost.zeros(layout)
    for c in costs:
        if c.Q.shape != total.Q.shape:
            raise AssemblyError("cost contribution does not match layout")
        total.add(c)
    eq = LinearEq.stack(eqs) if eqs else LinearEq.empty(layout)
    ineq = LinearIneq.stack(ineqs) if ineqs else LinearIneq.empty(layout)
    return PlannerProblem(layout, total, eq, ineq, list(nonlinear),
                          list(motion_domains), list(force_domains))
