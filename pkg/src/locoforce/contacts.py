"""Support polygon scheduling and manipulation contact bookkeeping.

Feet are ordered LF, RF, LH, RH.  A walking trot cycle produces five support
phases (full, LF-RH pair, full, RF-LH pair, full); a stationary robot keeps a
single polygon over the hold horizon.  Diagonal-pair supports are inflated
from the segment between the two stance feet into a thin rectangle so that a
nonempty interior survives the safety margin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LF, RF, LH, RH = 0, 1, 2, 3

GRAVITY = 9.81


class GeometryError(ValueError):
    """Degenerate or non-convex polygon input."""


class ScheduleError(ValueError):
    """Inconsistent timing in a support or force schedule."""


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """CCW convex hull (Andrew monotone chain), collinear points dropped."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        raise GeometryError("need at least 3 distinct points for a hull")

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
                if cross <= 1e-12:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise GeometryError("points are collinear")
    return np.array(hull)


def polygon_halfspaces(vertices: np.ndarray, margin: float = 0.0) -> np.ndarray:
    """Half-space rows ``(a, b, c)`` with ``a*x + b*y + c <= 0`` inside.

    Vertices must be convex and CCW ordered.  Rows are normalized so
    ``sqrt(a^2 + b^2) = 1``, which makes the row value a signed distance.  A
    positive ``margin`` uniformly shrinks the polygon (``c -> c + margin``).
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
        raise GeometryError(f"expected (k>=3, 2) vertex array, got {verts.shape}")
    k = verts.shape[0]
    rows = np.zeros((k, 3))
    for i in range(k):
        p, q = verts[i], verts[(i + 1) % k]
        edge = q - p
        length = np.hypot(*edge)
        if length < 1e-12:
            raise GeometryError("repeated vertex")
        # outward normal for a CCW polygon
        normal = np.array([edge[1], -edge[0]]) / length
        rows[i, :2] = normal
        rows[i, 2] = -normal @ p + margin
    # convexity / orientation check: every vertex inside every unshrunk edge
    vals = verts @ rows[:, :2].T + (rows[:, 2] - margin)
    if vals.max() > 1e-9:
        raise GeometryError("vertices are not convex CCW")
    return rows


@dataclass(frozen=True)
class SupportPolygon:
    """Timed convex support region in half-space form.

    ``halfspaces`` carry the safety margin used by the stability constraint;
    ``vertices`` keep the raw footprint so margins can be reported against the
    physical boundary.
    """

    vertices: np.ndarray
    halfspaces: np.ndarray
    t_start: float
    t_end: float
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    @classmethod
    def from_vertices(cls, vertices, t_start, t_end, margin=0.0):
        verts = np.asarray(vertices, dtype=float)
        return cls(verts, polygon_halfspaces(verts, margin), float(t_start), float(t_end))

    @property
    def interval(self) -> tuple[float, float]:
        return (self.t_start, self.t_end)

    def boundary_distance(self, point: np.ndarray) -> float:
        """Signed distance of ``point`` inside the raw polygon (positive inside)."""
        rows = polygon_halfspaces(self.vertices)
        return float(-(rows[:, :2] @ np.asarray(point)[:2] + rows[:, 2]).max())


@dataclass(frozen=True)
class SupportSequence:
    polygons: tuple
    cycle_duration: float

    def __post_init__(self) -> None:
        polys = tuple(self.polygons)
        if not polys:
            raise ScheduleError("empty support sequence")
        if abs(polys[0].t_start) > 1e-12:
            raise ScheduleError("support sequence must start at t=0")
        for a, b in zip(polys, polys[1:]):
            if abs(a.t_end - b.t_start) > 1e-12:
                raise ScheduleError("support intervals must be contiguous")
        if abs(polys[-1].t_end - self.cycle_duration) > 1e-12:
            raise ScheduleError("support intervals must cover the full cycle")
        object.__setattr__(self, "polygons", polys)

    def polygon_at(self, t: float) -> SupportPolygon:
        if t < -1e-9 or t > self.cycle_duration + 1e-9:
            raise ScheduleError(f"t={t} outside [0, {self.cycle_duration}]")
        for poly in self.polygons[:-1]:
            if t < poly.t_end:
                return poly
        return self.polygons[-1]

    def domains(self) -> list[tuple[float, float]]:
        return [p.interval for p in self.polygons]


@dataclass(frozen=True)
class ForceEvent:
    """Desired manipulation force (and rates) over ``[t0, tf)``."""

    t0: float
    tf: float
    force: np.ndarray
    rate: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rate2: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        if not self.tf > self.t0:
            raise ScheduleError(f"empty force event [{self.t0}, {self.tf}]")
        for name in ("force", "rate", "rate2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ScheduleError(f"bad {name} in force event")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ForceSchedule:
    """Contiguous force events; lookup follows the half-open convention."""

    events: tuple

    def __post_init__(self) -> None:
        evts = tuple(self.events)
        if not evts:
            raise ScheduleError("force schedule needs at least one event")
        for a, b in zip(evts, evts[1:]):
            if abs(a.tf - b.t0) > 1e-9:
                raise ScheduleError(f"gap in force schedule at t={a.tf}")
        object.__setattr__(self, "events", evts)

    @property
    def start(self) -> float:
        return self.events[0].t0

    @property
    def end(self) -> float:
        return self.events[-1].tf

    def event_at(self, t: float) -> ForceEvent:
        if t < self.start - 1e-9 or t > self.end + 1e-9:
            raise ScheduleError(f"t={t} outside schedule [{self.start}, {self.end}]")
        for ev in self.events[:-1]:
            if t < ev.tf:
                return ev
        return self.events[-1]

    def value_at(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ev = self.event_at(t)
        return ev.force, ev.rate, ev.rate2

    def window(self, t0: float, t1: float) -> "ForceSchedule":
        """Slice the schedule to ``[t0, t1]``, re-anchored so the window starts at 0.

        Times past the schedule end extend the final event.
        """
        if not t1 > t0:
            raise ScheduleError("empty window")
        out = []
        for ev in self.events:
            lo, hi = max(ev.t0, t0), min(ev.tf, t1)
            if hi - lo > 1e-9:
                out.append(ForceEvent(lo - t0, hi - t0, ev.force, ev.rate, ev.rate2))
        if not out:
            last = self.events[-1]
            out.append(ForceEvent(0.0, t1 - t0, last.force, last.rate, last.rate2))
        elif out[-1].tf < t1 - t0 - 1e-9:
            last = out[-1]
            out[-1] = ForceEvent(last.t0, t1 - t0, last.force, last.rate, last.rate2)
        return ForceSchedule(tuple(out))


@dataclass(frozen=True)
class ManipContact:
    """Fixed manipulator contact: geometry, free-motion mask and force limits.

    ``free_mask[k]`` true means axis ``k`` is a free-motion direction along
    which the planned force must vanish.  ``jacobian`` has shape (d, 3) and
    maps the end-effector force to the d arm actuator torques.
    """

    r_cm: np.ndarray
    free_mask: tuple
    jacobian: np.ndarray
    tau_lim: np.ndarray
    f_lo: np.ndarray
    f_hi: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.r_cm, dtype=float)
        jac = np.asarray(self.jacobian, dtype=float)
        tau = np.asarray(self.tau_lim, dtype=float)
        lo = np.asarray(self.f_lo, dtype=float)
        hi = np.asarray(self.f_hi, dtype=float)
        if jac.ndim != 2 or jac.shape[1] != 3 or jac.shape[0] < 1:
            raise ValueError(f"jacobian must be (d>=1, 3), got {jac.shape}")
        if tau.shape != (jac.shape[0],):
            raise ValueError("tau_lim length must match jacobian rows")
        if np.any(lo > hi):
            raise ValueError("force lower bound exceeds upper bound")
        object.__setattr__(self, "r_cm", r)
        object.__setattr__(self, "free_mask", tuple(bool(m) for m in self.free_mask))
        object.__setattr__(self, "jacobian", jac)
        object.__setattr__(self, "tau_lim", tau)
        object.__setattr__(self, "f_lo", lo)
        object.__setattr__(self, "f_hi", hi)


@dataclass(frozen=True)
class GaitParams:
    """Trot timing and polygon shaping parameters.

    ``com_height`` feeds the capture-point gain ``sqrt(h/g)`` of the foothold
    rule.  The cycle lasts ``3*full_support_duration + 2*swing_duration`` and
    shrinks proportionally once the commanded speed exceeds
    ``reference_speed``.
    """

    full_support_duration: float = 0.1
    swing_duration: float = 0.25
    line_halfwidth: float = 0.05
    polygon_margin: float = 0.02
    reference_speed: float = 0.5
    stationary_eps: float = 1e-3
    com_height: float = 0.45

    def __post_init__(self) -> None:
        if self.full_support_duration <= 0 or self.swing_duration <= 0:
            raise ValueError("gait phase durations must be positive")

    @property
    def cycle_duration(self) -> float:
        return 3 * self.full_support_duration + 2 * self.swing_duration


def foothold_displacement(v_des: np.ndarray, v_actual: np.ndarray, gait: GaitParams,
                          stance_duration: float) -> np.ndarray:
    """Touchdown advance of a swing foot.

    Nominal carry ``v_des * stance/2`` plus a capture-point style correction
    ``sqrt(h/g) * (v_actual - v_des)``; vertical motion is ignored.
    """
    k = math.sqrt(gait.com_height / GRAVITY)
    d = np.asarray(v_des, dtype=float) * (stance_duration / 2.0) \
        + k * (np.asarray(v_actual, dtype=float) - np.asarray(v_des, dtype=float))
    d = d.copy()
    d[2] = 0.0
    return d


def _pair_rectangle(p: np.ndarray, q: np.ndarray, halfwidth: float) -> np.ndarray:
    """Inflate the 2D segment p-q into a CCW rectangle of the given halfwidth."""
    u = q - p
    length = np.hypot(*u)
    if length < 1e-9:
        raise GeometryError("diagonal support feet coincide")
    u = u / length
    n = np.array([-u[1], u[0]])
    w = halfwidth
    return np.array([
        p - u * w - n * w,
        q + u * w - n * w,
        q + u * w + n * w,
        p - u * w + n * w,
    ])


def generate_support_sequence(feet: np.ndarray, v_des: np.ndarray, gait: GaitParams,
                              v_actual: np.ndarray | None = None) -> SupportSequence:
    """Support polygons for one gait cycle given the current stance.

    Stationary commands yield a single full-support polygon over the hold
    horizon.  A walking command yields the five-phase trot sequence with the
    swing feet advanced at touchdown by :func:`foothold_displacement`.
    """
    feet = np.asarray(feet, dtype=float)
    if feet.shape != (4, 3):
        raise ValueError(f"expected 4 feet as (4, 3), got {feet.shape}")
    v_des = np.asarray(v_des, dtype=float)
    if v_actual is None:
        v_actual = v_des
    speed = float(np.hypot(v_des[0], v_des[1]))
    margin = gait.polygon_margin

    if speed < gait.stationary_eps:
        hull = convex_hull_2d(feet[:, :2])
        poly = SupportPolygon.from_vertices(hull, 0.0, gait.cycle_duration, margin)
        return SupportSequence((poly,), gait.cycle_duration)

    scale = 1.0 if speed <= gait.reference_speed else gait.reference_speed / speed
    t_full = gait.full_support_duration * scale
    t_swing = gait.swing_duration * scale
    cycle = 3 * t_full + 2 * t_swing
    stance_duration = cycle - t_swing
    step = foothold_displacement(v_des, v_actual, gait, stance_duration)

    current = feet.copy()
    after_first = current.copy()
    after_first[RF] += step
    after_first[LH] += step
    after_second = after_first.copy()
    after_second[LF] += step
    after_second[RH] += step

    t = 0.0
    polys = []

    def full(stance, duration):
        nonlocal t
        hull = convex_hull_2d(stance[:, :2])
        polys.append(SupportPolygon.from_vertices(hull, t, t + duration, margin))
        t += duration

    def pair(a, b, duration):
        nonlocal t
        rect = _pair_rectangle(a[:2], b[:2], gait.line_halfwidth)
        polys.append(SupportPolygon.from_vertices(rect, t, t + duration, margin))
        t += duration

    full(current, t_full)
    pair(current[LF], current[RH], t_swing)          # RF, LH swinging
    full(after_first, t_full)
    pair(after_first[RF], after_first[LH], t_swing)  # LF, RH swinging
    full(after_second, t_full)
    return SupportSequence(tuple(polys), cycle)
