"""Task specification: ordered critical configurations with Euler bounds."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .geom import (EulerAngles, Pose, euler_to_quat, pose_compose, pose_conjugate,
                   quat_distance)

FREE_BOUND = (-2 * math.pi, 2 * math.pi)
DISTINCT_TOL = 1e-6
_ANGLES = ("roll", "pitch", "yaw")


@dataclass(frozen=True)
class CriticalConfiguration:
    position: tuple
    bounds: tuple  # ((lo, hi) for roll, pitch, yaw)
    nominal: EulerAngles

    def __post_init__(self):
        for name, (lo, hi), v in zip(_ANGLES, self.bounds, self.nominal):
            if lo > hi:
                raise SchemaError(f"{name} bound inverted: [{lo}, {hi}]")
            if not lo - 1e-12 <= v <= hi + 1e-12:
                raise SchemaError(f"{name} nominal {v} outside [{lo}, {hi}]")

    @classmethod
    def pinned(cls, position, euler) -> "CriticalConfiguration":
        e = EulerAngles(*map(float, euler))
        return cls(tuple(map(float, position)), tuple((v, v) for v in e), e)


@dataclass(frozen=True)
class Task:
    name: str
    constraints: tuple

    def __post_init__(self):
        if len(self.constraints) < 2:
            raise SchemaError("a task needs at least two critical configurations")
        poses = self.poses()
        for i in range(len(poses) - 1):
            a, b = poses[i], poses[i + 1]
            if (np.linalg.norm(a.translation - b.translation) <= DISTINCT_TOL
                    and quat_distance(a.rotation, b.rotation) <= DISTINCT_TOL):
                raise SchemaError(f"configurations {i + 1} and {i + 2} coincide")

    def __len__(self):
        return len(self.constraints)

    def poses(self) -> list:
        return [config_to_pose(c) for c in self.constraints]

    def to_dict(self) -> dict:
        cons = []
        for c in self.constraints:
            euler = {}
            for name, (lo, hi), v in zip(_ANGLES, c.bounds, c.nominal):
                euler[name] = lo if lo == hi else [lo, hi]
            entry = {"p": list(c.position), "euler": euler}
            if any(lo != hi and v != 0.5 * (lo + hi)
                   for (lo, hi), v in zip(c.bounds, c.nominal)):
                entry["nominal"] = dict(zip(_ANGLES, c.nominal))
            cons.append(entry)
        return {"name": self.name, "constraints": cons}


@dataclass(frozen=True)
class TaskSegment:
    task: Task
    start: int  # 0-based, inclusive
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end < len(self.task):
            raise ValueError(f"bad segment [{self.start}, {self.end}] for {len(self.task)} configurations")


@dataclass(frozen=True)
class TaskFeature:
    deltas: tuple

    def __len__(self):
        return len(self.deltas)


def _parse_angle(value):
    if value is None or value == "free":
        return FREE_BOUND
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value), float(value))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return (float(value[0]), float(value[1]))
    raise SchemaError(f"angle must be a number, [lo, hi], null or 'free'; got {value!r}")


def parse_task_dict(doc: dict) -> Task:
    if not isinstance(doc, dict) or "constraints" not in doc:
        raise SchemaError("task document needs a 'constraints' list")
    cons = []
    for k, entry in enumerate(doc["constraints"]):
        try:
            p = tuple(float(v) for v in entry["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"constraint {k + 1}: bad position") from exc
        if len(p) != 3:
            raise SchemaError(f"constraint {k + 1}: position needs 3 values")
        euler = entry.get("euler", {})
        bounds = tuple(_parse_angle(euler.get(name, 0.0)) for name in _ANGLES)
        explicit = entry.get("nominal", {})
        nominal = EulerAngles(*(float(explicit[name]) if name in explicit else 0.5 * (lo + hi)
                                for name, (lo, hi) in zip(_ANGLES, bounds)))
        cons.append(CriticalConfiguration(p, bounds, nominal))
    return Task(str(doc.get("name", "task")), tuple(cons))


def parse_task(document) -> Task:
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"task document is not JSON: {exc}") from exc
    return parse_task_dict(doc)


def config_to_pose(c: CriticalConfiguration) -> Pose:
    return Pose(euler_to_quat(c.nominal), c.position)


def relative_deltas(poses) -> tuple:
    """delta_i = D_i^* (x) D_last for every pose but the last."""
    last = poses[-1]
    return tuple(pose_compose(pose_conjugate(D), last) for D in poses[:-1])


def segment_feature(s: TaskSegment) -> TaskFeature:
    poses = s.task.poses()[s.start:s.end + 1]
    return TaskFeature(relative_deltas(poses))
