"""Map matched demonstration features onto task segments and build plans.

Mapping works on the positions of the demonstration poses expressed in the
frame of the final demonstration pose (``u_l``, the translation of the
inverse of each delta). Those positions are rotated so that the one paired
with the segment start lines up with the task's start position (seen from
the goal), scaled by the ratio of the two distances, and re-attached to the
task goal. Rotations are copied from the demonstration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAxisError, MappingError
from .geom import (IDENTITY_QUAT, Pose, angle_between, axis_angle_quat,
                   conjugate, interpolate, pose_compose, pose_conjugate, rotate_vector)
from .similarity import Allocation, SimilarityConfig, allocation_cost, is_semantically_similar
from .task import Task, relative_deltas

MAX_ROTATION_STEP = 0.175
_PARALLEL_TOL = 1e-9


def alignment_quat(demo_dir, task_dir) -> np.ndarray:
    """Shortest rotation taking ``demo_dir`` onto ``task_dir``."""
    a = np.asarray(demo_dir, dtype=float)
    b = np.asarray(task_dir, dtype=float)
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na < 1e-15 or nb < 1e-15:
        raise DegenerateAxisError("alignment needs two nonzero vectors")
    a, b = a / na, b / nb
    c = max(-1.0, min(1.0, float(np.dot(a, b))))
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    if s > _PARALLEL_TOL:
        return axis_angle_quat(axis, math.atan2(s, c))
    if c > 0:
        return IDENTITY_QUAT.copy()
    z = np.array([0.0, 0.0, 1.0])
    perp = z - np.dot(z, a) * a
    if np.linalg.norm(perp) < _PARALLEL_TOL:
        perp = np.array([1.0, 0.0, 0.0])
    return axis_angle_quat(perp, math.pi)


@dataclass(frozen=True)
class MappedFeature:
    deltas: tuple
    demo: str
    segment: tuple  # (start, end), 0-based


def map_feature(hd, tf, alloc: Allocation, cfg: SimilarityConfig = SimilarityConfig(),
                segment=(0, 1), anchor: bool = True) -> MappedFeature:
    """Re-target ``hd`` (from its allocated first delta onward) onto ``tf``.

    With ``anchor`` set, demo waypoints paired with intermediate task
    configurations are pulled onto those configurations by a translation
    correction blended linearly between anchors. The correction is zero at
    the segment start and goal, so those stay exact either way.
    """
    task_deltas = tuple(getattr(tf, "deltas", tf))
    l1 = alloc.pairs[0][1]
    tail = hd.matching_deltas[l1:]
    eps = cfg.zero_translation_epsilon
    u_task = [pose_conjugate(d).translation for d in task_deltas]
    us = [pose_conjugate(d).translation for d in tail]
    n_task, n_demo = float(np.linalg.norm(u_task[0])), float(np.linalg.norm(us[0]))
    if n_task < eps:
        A, s = IDENTITY_QUAT, 0.0
    elif n_demo < eps:
        raise MappingError(f"demo {hd.name!r} has no start displacement to scale onto the segment")
    else:
        A, s = alignment_quat(us[0], u_task[0]), n_task / n_demo
    positions = [s * rotate_vector(A, u) for u in us]
    if anchor and len(task_deltas) > 1:
        positions = _anchor(positions, u_task, [l - l1 for _, l in alloc.pairs])
    mapped = [pose_conjugate(Pose(conjugate(d.rotation), p)) for d, p in zip(tail, positions)]
    mapped[-1] = Pose(IDENTITY_QUAT, np.zeros(3))
    return MappedFeature(tuple(mapped), hd.name, tuple(segment))


def _anchor(positions: list, targets: list, idx: list) -> list:
    """Blend per-anchor offsets so ``positions[idx[a]]`` lands on ``targets[a]``."""
    last = len(positions) - 1
    marks = list(idx) + ([last] if idx[-1] != last else [])
    offsets = [np.asarray(t) - positions[i] for t, i in zip(targets, idx)]
    offsets = [np.zeros(3)] + offsets[1:] + ([np.zeros(3)] if idx[-1] != last else [])
    out = list(positions)
    for (a, ca), (b, cb) in zip(zip(marks, offsets), zip(marks[1:], offsets[1:])):
        for t in range(a, b + 1):
            w = (t - a) / (b - a)
            out[t] = positions[t] + (1 - w) * ca + w * cb
    return out


def reconstruct_plan(goal: Pose, mf: MappedFeature) -> list:
    out = [pose_compose(goal, pose_conjugate(d)) for d in mf.deltas[:-1]]
    out.append(goal)
    return out


def densify(waypoints, max_step: float = MAX_ROTATION_STEP) -> list:
    """Insert blended poses so that consecutive rotations differ by at most ``max_step``."""
    if not waypoints:
        return []
    out = [waypoints[0]]
    for b in waypoints[1:]:
        a = out[-1]
        n = math.ceil(angle_between(a.rotation, b.rotation) / max_step - 1e-12)
        for k in range(1, n):
            out.append(interpolate(a, b, k / n))
        out.append(b)
    return out


@dataclass
class MotionPlan:
    task: str
    waypoints: list
    provenance: list = field(default_factory=list)  # dicts: segment (1-based), demo, allocation

    def to_dict(self) -> dict:
        return {"task": self.task,
                "waypoints": [w.to_dict("p") for w in self.waypoints],
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, doc: dict) -> "MotionPlan":
        from .library import poses_from_doc
        return cls(str(doc.get("task", "task")), list(poses_from_doc({"poses": doc["waypoints"]})),
                   list(doc.get("provenance", [])))


@dataclass(frozen=True)
class Match:
    demo: int
    allocation: Allocation
    cost: float


def match_table(task: Task, lib, cfg: SimilarityConfig, poses=None) -> dict:
    """{(j, k): [Match, ...]} for every segment j < k that some feature covers."""
    poses = poses if poses is not None else task.poses()
    n = len(poses)
    table = {}
    for j in range(n - 1):
        for k in range(j + 1, n):
            deltas = relative_deltas(poses[j:k + 1])
            found = []
            for i, hd in enumerate(lib.features):
                alloc = is_semantically_similar(deltas, hd, cfg)
                if alloc is not None:
                    found.append(Match(i, alloc, allocation_cost(deltas, hd, alloc)))
            if found:
                table[(j, k)] = found
    return table


def goal_reachable(n: int, table: dict) -> list:
    """reach[j]: a chain of matched segments leads from configuration j to the last one."""
    reach = [False] * n
    reach[n - 1] = True
    for j in range(n - 2, -1, -1):
        reach[j] = any(reach[k] for k in range(j + 1, n) if (j, k) in table)
    return reach


@dataclass
class CoverageReport:
    matched: dict  # (j, k) -> list of demo names
    uncovered: list  # (j, k) 0-based adjacent pairs

    @property
    def covered(self) -> bool:
        return not self.uncovered

    def to_dict(self) -> dict:
        return {"covered": self.covered,
                "uncovered": [[j + 1, k + 1] for j, k in self.uncovered]}


def uncovered_segments(n: int, table: dict) -> list:
    if goal_reachable(n, table)[0]:
        return []
    adjacent = [(j, j + 1) for j in range(n - 1) if (j, j + 1) not in table]
    spanned = [(j, j + 1) for j, _ in adjacent
               if any(a <= j and j + 1 <= b for a, b in table)]
    minimal = [p for p in adjacent if p not in spanned]
    return minimal or adjacent


def coverage_check(task: Task, lib, cfg: SimilarityConfig = SimilarityConfig()) -> CoverageReport:
    table = match_table(task, lib, cfg)
    names = {seg: [lib.features[m.demo].name for m in ms] for seg, ms in table.items()}
    return CoverageReport(names, uncovered_segments(len(task), table))
