"""Flat dotted key=value scenario configuration.

Files contain one ``section.key=value`` assignment per line; values are JSON
(numbers, booleans, strings, nested lists).  ``#`` starts a comment, blank
lines are ignored.  Unknown keys are rejected so typos fail loudly.  Indexed
groups (``event.0.force``, ``disturbance.1.t_start``) describe the force
schedule and the injected disturbances.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, fields

import numpy as np

from .contacts import ForceEvent, ForceSchedule, GaitParams, ManipContact
from .planner import TaskSpec
from .problem import CostWeights
from .sim import Disturbance, ScenarioSetup
from .solver import SolverOptions


class ConfigError(ValueError):
    """Malformed, unknown, or inconsistent configuration input."""


_SCALAR_KEYS = {
    "robot.mass": float,
    "robot.friction": float,
    "robot.com_height": float,
    "task.mode": str,
    "sim.duration": float,
    "sim.tick": float,
    "sim.dt": float,
    "sim.seed": int,
    "sim.transmission": float,
    "sim.random_disturbances": int,
    "gait.full_support_duration": float,
    "gait.swing_duration": float,
    "gait.line_halfwidth": float,
    "gait.polygon_margin": float,
    "gait.reference_speed": float,
    "weights.track_value": float,
    "weights.track_rate": float,
    "weights.track_accel": float,
    "weights.force_value": float,
    "weights.force_rate": float,
    "weights.force_accel": float,
    "weights.deviation": float,
    "weights.force_deviation": float,
    "weights.initial_match": float,
    "weights.initial_force_match": float,
    "weights.min_accel": float,
    "solver.max_sqp_iters": int,
    "solver.max_qp_iters": int,
    "solver.constraint_tol": float,
    "solver.kkt_tol": float,
    "solver.step_tol": float,
    "solver.backtrack_factor": float,
    "solver.merit_penalty": float,
}

_VECTOR_KEYS = {
    "robot.feet": (4, 3),
    "manip.r_cm": (3,),
    "manip.free": (3,),
    "manip.jacobian": None,  # (d, 3), d checked at build time
    "manip.tau_lim": None,
    "manip.f_lo": (3,),
    "manip.f_hi": (3,),
    "task.v_des": (3,),
}

_EVENT_KEYS = {"t0", "tf", "force", "rate", "rate2"}
_DISTURBANCE_KEYS = {"t_start", "duration", "force"}
_INDEXED = re.compile(r"^(event|disturbance)\.(\d+)\.([a-z0-9_]+)$")


def parse_config(text: str) -> dict:
    """Parse config text into a flat ``{dotted_key: value}`` dict.

    Validates key names against the schema; values are JSON-decoded.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        _validate_key(key, parsed, lineno)
        out[key] = parsed
    return out


def _validate_key(key: str, value, lineno: int) -> None:
    if key in _SCALAR_KEYS:
        want = _SCALAR_KEYS[key]
        if want is str:
            if not isinstance(value, str):
                raise ConfigError(f"line {lineno}: {key} must be a string")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"line {lineno}: {key} must be a number")
        return
    if key in _VECTOR_KEYS:
        shape = _VECTOR_KEYS[key]
        arr = np.asarray(value)
        if shape is not None and arr.shape != shape:
            raise ConfigError(f"line {lineno}: {key} must have shape {shape}, "
                              f"got {arr.shape}")
        return
    m = _INDEXED.match(key)
    if m:
        group, _, field = m.groups()
        allowed = _EVENT_KEYS if group == "event" else _DISTURBANCE_KEYS
        if field not in allowed:
            raise ConfigError(f"line {lineno}: unknown {group} field {field!r}")
        return
    raise ConfigError(f"line {lineno}: unknown key {key!r}")


def config_digest(raw: dict) -> str:
    """Stable hash of the parsed config, for provenance in the metrics file."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _collect_indexed(raw: dict, group: str) -> list[dict]:
    items: dict[int, dict] = {}
    for key, value in raw.items():
        m = _INDEXED.match(key)
        if m and m.group(1) == group:
            items.setdefault(int(m.group(2)), {})[m.group(3)] = value
    if items and sorted(items) != list(range(len(items))):
        raise ConfigError(f"{group} indices must be 0..{len(items) - 1}")
    return [items[i] for i in sorted(items)]


def _events(raw: dict, duration: float) -> ForceSchedule:
    specs = _collect_indexed(raw, "event")
    if not specs:
        return ForceSchedule((ForceEvent(0.0, duration, np.zeros(3)),))
    events = []
    for i, spec in enumerate(specs):
        missing = {"t0", "tf", "force"} - spec.keys()
        if missing:
            raise ConfigError(f"event.{i} missing {sorted(missing)}")
        events.append(ForceEvent(float(spec["t0"]), float(spec["tf"]),
                                 np.asarray(spec["force"], dtype=float),
                                 np.asarray(spec.get("rate", np.zeros(3)), dtype=float),
                                 np.asarray(spec.get("rate2", np.zeros(3)), dtype=float)))
    schedule = ForceSchedule(tuple(events))
    if schedule.start > 1e-9:
        raise ConfigError("force events must start at t=0")
    if schedule.end < duration - 1e-9:
        # extend the trailing event so the schedule covers the whole run
        last = schedule.events[-1]
        events[-1] = ForceEvent(last.t0, duration, last.force, last.rate, last.rate2)
        schedule = ForceSchedule(tuple(events))
    return schedule


def _disturbances(raw: dict) -> list[Disturbance]:
    out = []
    for i, spec in enumerate(_collect_indexed(raw, "disturbance")):
        missing = _DISTURBANCE_KEYS - spec.keys()
        if missing:
            raise ConfigError(f"disturbance.{i} missing {sorted(missing)}")
        out.append(Disturbance(float(spec["t_start"]), float(spec["duration"]),
                               np.asarray(spec["force"], dtype=float)))
    return out


def _subset(raw: dict, prefix: str, cls):
    """Instantiate a dataclass from the ``prefix.*`` keys, using its defaults."""
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        section, _, name = key.partition(".")
        if section == prefix and name in names:
            kwargs[name] = value
    return cls(**kwargs)


def build_setup(raw: dict, overrides: dict | None = None) -> ScenarioSetup:
    """Turn a parsed config dict into a runnable :class:`ScenarioSetup`.

    ``overrides`` maps dotted keys to replacement values (already typed);
    unknown override keys are rejected like unknown file keys.
    """
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        _validate_key(key, value, 0)
        raw[key] = value

    for required in ("robot.mass", "robot.friction", "robot.feet"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    duration = float(raw.get("sim.duration", 6.0))
    com_height = float(raw.get("robot.com_height", 0.45))
    jac = np.asarray(raw.get("manip.jacobian", (0.3 * np.eye(3)).tolist()), dtype=float)
    manip = ManipContact(
        r_cm=np.asarray(raw.get("manip.r_cm", [0.4, 0.0, 0.0]), dtype=float),
        free_mask=tuple(bool(b) for b in raw.get("manip.free", [False, False, False])),
        jacobian=jac,
        tau_lim=np.asarray(raw.get("manip.tau_lim", [60.0] * jac.shape[0]), dtype=float),
        f_lo=np.asarray(raw.get("manip.f_lo", [-200.0] * 3), dtype=float),
        f_hi=np.asarray(raw.get("manip.f_hi", [200.0] * 3), dtype=float),
    )
    task = TaskSpec(
        v_des=np.asarray(raw.get("task.v_des", [0.0, 0.0, 0.0]), dtype=float),
        force_schedule=_events(raw, duration),
        manip=manip,
        mode=raw.get("task.mode", "full"),
    )
    gait_kwargs = {}
    for name in ("full_support_duration", "swing_duration", "line_halfwidth",
                 "polygon_margin", "reference_speed"):
        key = f"gait.{name}"
        if key in raw:
            gait_kwargs[name] = float(raw[key])
    gait = GaitParams(com_height=com_height, **gait_kwargs)

    return ScenarioSetup(
        mass=float(raw["robot.mass"]),
        friction=float(raw["robot.friction"]),
        com_height=com_height,
        feet_offsets=np.asarray(raw["robot.feet"], dtype=float),
        task=task,
        gait=gait,
        weights=_subset(raw, "weights", CostWeights),
        solver_opts=_subset(raw, "solver", SolverOptions),
        disturbances=_disturbances(raw),
        duration=duration,
        tick=float(raw.get("sim.tick", 0.05)),
        dt=float(raw.get("sim.dt", 0.01)),
        transmission=float(raw.get("sim.transmission", 0.85)),
        seed=int(raw.get("sim.seed", 0)),
        random_disturbance_count=int(raw.get("sim.random_disturbances", 0)),
    )


def load_setup(path, overrides: dict | None = None):
    """Read, parse, and build a scenario; returns (setup, raw dict, digest)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    raw = parse_config(text)
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        _validate_key(key, value, 0)
        merged[key] = value
    return build_setup(raw, overrides), merged, config_digest(merged)
