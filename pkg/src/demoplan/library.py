"""Demonstration ingestion, feature extraction and the feature library."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, DuplicateNameError, SchemaError
from .geom import IDENTITY_POSE, Pose, angle_between, quat_norm
from .robot import JointTrajectory, RobotModel, forward_kinematics
from .task import relative_deltas

log = logging.getLogger(__name__)

MAX_ROTATION_STEP = 0.175  # rad, roughly 10 degrees
_SILENT_RENORM = 1e-6


@dataclass(frozen=True)
class Demonstration:
    name: str
    poses: tuple

    def __post_init__(self):
        if len(self.poses) < 2:
            raise SchemaError("a demonstration needs at least two poses")


@dataclass(frozen=True)
class DemoFeature:
    """Relative transforms of each recorded pose to the final one.

    ``deltas`` holds the m-1 extracted transforms; ``matching_deltas``
    appends the terminal identity used when allocating task deltas.
    """

    name: str
    deltas: tuple

    @property
    def matching_deltas(self) -> tuple:
        return self.deltas + (IDENTITY_POSE,)

    def __eq__(self, other):
        if not isinstance(other, DemoFeature):
            return NotImplemented
        return self.name == other.name and self.deltas == other.deltas

    def __hash__(self):
        return hash((self.name, self.deltas))

    def to_dict(self) -> dict:
        return {"name": self.name, "deltas": [d.to_dict("t") for d in self.deltas]}

    @classmethod
    def from_dict(cls, doc: dict) -> "DemoFeature":
        try:
            deltas = tuple(Pose(d["r"], d["t"]) for d in doc["deltas"])
            return cls(str(doc["name"]), deltas)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad feature entry: {exc}") from exc


@dataclass
class Library:
    version: int = 0
    features: list = field(default_factory=list)

    def __len__(self):
        return len(self.features)

    def names(self) -> list:
        return [f.name for f in self.features]

    def add(self, feature: DemoFeature) -> "Library":
        if feature.name in self.names():
            raise DuplicateNameError(f"library already holds a feature named {feature.name!r}")
        self.features.append(feature)
        self.version += 1
        return self

    def snapshot(self) -> "Library":
        return Library(self.version, list(self.features))

    def to_dict(self) -> dict:
        return {"version": self.version, "features": [f.to_dict() for f in self.features]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Library":
        if not isinstance(doc, dict) or "features" not in doc:
            raise SchemaError("library document needs 'version' and 'features'")
        lib = cls(int(doc.get("version", 0)), [DemoFeature.from_dict(f) for f in doc["features"]])
        if len(set(lib.names())) != len(lib.names()):
            raise SchemaError("library feature names must be unique")
        return lib


def library_add(lib: Library, feature: DemoFeature) -> Library:
    return lib.add(feature)


def library_save(lib: Library, path) -> None:
    Path(path).write_text(json.dumps(lib.to_dict(), indent=1))


def library_load(path) -> Library:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"library file is not JSON: {exc}") from exc
    return Library.from_dict(doc)


def _densify_joints(m: RobotModel, samples: np.ndarray, max_step: float) -> np.ndarray:
    out = [samples[0]]
    for q1 in samples[1:]:
        q0 = out[-1]
        step = angle_between(forward_kinematics(m, q0).rotation, forward_kinematics(m, q1).rotation)
        n = max(1, math.ceil(step / max_step - 1e-12)) if step >= max_step else 1
        for k in range(1, n + 1):
            out.append(q0 + (q1 - q0) * k / n)
    return np.array(out)


def import_joint_demo(m: RobotModel, t: JointTrajectory, name: str,
                      max_step: float | None = None) -> Demonstration:
    """FK of every joint sample.

    ``max_step`` (rad) enables linear joint-space densification wherever
    consecutive end-effector rotations differ by at least that angle.
    """
    samples = t.samples
    if samples.shape[1] != m.dof:
        raise DimensionMismatchError(f"trajectory has {samples.shape[1]} joints, robot has {m.dof}")
    if samples.shape[0] < 2:
        raise SchemaError("a demonstration needs at least two samples")
    if max_step is not None:
        samples = _densify_joints(m, samples, max_step)
    return Demonstration(name, tuple(forward_kinematics(m, q) for q in samples))


def _rotation_from_doc(r, k: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (4,) or not np.all(np.isfinite(r)):
        raise SchemaError(f"pose {k + 1}: rotation must be 4 finite numbers")
    n = quat_norm(r)
    if n < 1e-12:
        raise SchemaError(f"pose {k + 1}: zero rotation quaternion")
    if abs(n - 1.0) > _SILENT_RENORM:
        log.warning("pose %d: rotation norm %.6g normalized", k + 1, n)
    return r / n


def poses_from_doc(doc: dict) -> tuple:
    try:
        return tuple(Pose(_rotation_from_doc(e["r"], k), e["p"]) for k, e in enumerate(doc["poses"]))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad pose entry: {exc}") from exc


def import_pose_demo(document, name: str | None = None) -> Demonstration:
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"demo document is not JSON: {exc}") from exc
    if "poses" not in doc:
        raise SchemaError("pose demo needs a 'poses' list")
    return Demonstration(name or str(doc.get("name", "demo")), poses_from_doc(doc))


def load_demo_file(path, robot: RobotModel | None = None, name: str | None = None,
                   max_step: float | None = None) -> Demonstration:
    """Read either demo file flavour (joint samples or poses)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"demo file is not JSON: {exc}") from exc
    name = name or str(doc.get("name", Path(path).stem))
    if "joints" in doc:
        if robot is None:
            raise SchemaError("joint-space demo needs a robot model")
        traj = JointTrajectory(np.asarray(doc["joints"], dtype=float), float(doc.get("dt", 0.01)))
        return import_joint_demo(robot, traj, name, max_step)
    return import_pose_demo(text, name)


def extract_feature(d: Demonstration) -> DemoFeature:
    return DemoFeature(d.name, relative_deltas(d.poses))
