"""Serial-arm kinematics from classic (distal) DH parameters.

Twists are ordered angular then linear: ``(w, v)`` with ``v`` the spatial
linear velocity of the point at the base origin.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, SchemaError
from .geom import IDENTITY_POSE, Pose, axis_angle_quat, pose_compose, rotate_vector

DEFAULT_ROBOT = "ur5e_like.json"


@dataclass(frozen=True)
class DHRow:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0


@dataclass(frozen=True)
class RobotModel:
    name: str
    joints: tuple
    limits: tuple

    def __post_init__(self):
        if len(self.joints) < 1:
            raise SchemaError("robot needs at least one joint")
        if len(self.limits) != len(self.joints):
            raise SchemaError("one (min, max) limit pair per joint is required")
        for lo, hi in self.limits:
            if not lo < hi:
                raise SchemaError(f"joint limit min {lo} must be below max {hi}")

    @property
    def dof(self) -> int:
        return len(self.joints)

    @classmethod
    def from_dict(cls, doc: dict) -> "RobotModel":
        try:
            joints = tuple(DHRow(float(r["a"]), float(r["alpha"]), float(r["d"]),
                                 float(r.get("theta_offset", 0.0))) for r in doc["dh"])
            limits = tuple((float(l["min"]), float(l["max"])) for l in doc["limits"])
            return cls(str(doc.get("name", "robot")), joints, limits)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"bad robot document: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dh": [{"a": j.a, "alpha": j.alpha, "d": j.d, "theta_offset": j.theta_offset}
                   for j in self.joints],
            "limits": [{"min": lo, "max": hi} for lo, hi in self.limits],
        }


def load_robot(path=None) -> RobotModel:
    """Load a robot file; ``None`` loads the bundled 6R stand-in."""
    if path is None:
        text = resources.files("demoplan").joinpath("data", DEFAULT_ROBOT).read_text()
    else:
        text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"robot file is not JSON: {exc}") from exc
    return RobotModel.from_dict(doc)


def _check_dims(m: RobotModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != m.dof:
        raise DimensionMismatchError(f"expected {m.dof} joint values, got {q.size}")
    return q


def _link_pose(row: DHRow, theta: float) -> Pose:
    # Rz(theta) Tz(d) Tx(a) Rx(alpha)
    rz = Pose(axis_angle_quat((0, 0, 1), theta), (0.0, 0.0, row.d))
    rx = Pose(axis_angle_quat((1, 0, 0), row.alpha), (row.a, 0.0, 0.0))
    return pose_compose(rz, rx)


def frame_poses(m: RobotModel, q) -> list:
    """Poses of frames 0..r (frame 0 is the base)."""
    q = _check_dims(m, q)
    frames = [IDENTITY_POSE]
    for row, qi in zip(m.joints, q):
        frames.append(pose_compose(frames[-1], _link_pose(row, qi + row.theta_offset)))
    return frames


def forward_kinematics(m: RobotModel, q) -> Pose:
    return frame_poses(m, q)[-1]


def spatial_jacobian(m: RobotModel, q) -> np.ndarray:
    frames = frame_poses(m, q)
    J = np.zeros((6, m.dof))
    for i in range(m.dof):
        z = rotate_vector(frames[i].rotation, (0.0, 0.0, 1.0))
        o = frames[i].translation
        J[:3, i] = z
        J[3:, i] = np.cross(o, z)
    return J


@dataclass
class LimitViolation:
    step: int
    joint: int
    value: float
    excess: float


@dataclass
class LimitReport:
    violations: list = field(default_factory=list)

    @property
    def worst_excess(self) -> float:
        return max((v.excess for v in self.violations), default=0.0)

    def __len__(self):
        return len(self.violations)

    def __bool__(self):
        return bool(self.violations)

    def to_dict(self) -> dict:
        return {
            "count": len(self.violations),
            "worst_excess": self.worst_excess,
            "violations": [vars(v) for v in self.violations],
        }


@dataclass
class JointTrajectory:
    samples: np.ndarray
    h: float = 0.01

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if self.samples.shape[0] == 0:
            raise DimensionMismatchError("joint trajectory is empty")

    def __len__(self):
        return self.samples.shape[0]

    def to_csv(self) -> str:
        r = self.samples.shape[1]
        lines = ["t," + ",".join(f"q{i + 1}" for i in range(r))]
        for k, row in enumerate(self.samples):
            lines.append(",".join([repr(k * self.h)] + [repr(float(v)) for v in row]))
        return "\n".join(lines) + "\n"


def check_limits(m: RobotModel, t: JointTrajectory) -> LimitReport:
    if t.samples.shape[1] != m.dof:
        raise DimensionMismatchError("trajectory width does not match robot DOF")
    lo = np.array([l[0] for l in m.limits])
    hi = np.array([l[1] for l in m.limits])
    report = LimitReport()
    for k, row in enumerate(t.samples):
        for j in np.nonzero((row < lo) | (row > hi))[0]:
            excess = float(lo[j] - row[j]) if row[j] < lo[j] else float(row[j] - hi[j])
            report.violations.append(LimitViolation(k, int(j), float(row[j]), excess))
    return report
