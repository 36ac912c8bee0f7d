"""Quaternion and dual-quaternion kernel.

Quaternions are numpy arrays ``[w, x, y, z]``. A :class:`Pose` is a unit dual
quaternion ``real + eps * dual`` with ``dual = 0.5 * (0, t) * real``; it is
stored as its rotation and translation so that serialization round-trips
exactly, while ``real``/``dual`` expose the algebraic form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateAxisError, InvalidPoseError

UNIT_TOL = 1e-9
_RENORM_TOL = 1e-12

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


class EulerAngles(NamedTuple):
    roll: float
    pitch: float
    yaw: float


def quat(w, x=0.0, y=0.0, z=0.0) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def hamilton(q1, q2) -> np.ndarray:
    a1, b1, c1, d1 = q1
    a2, b2, c2, d2 = q2
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def conjugate(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]], dtype=float)


def quat_norm(q) -> float:
    return math.sqrt(float(np.dot(q, q)))


def normalize(q) -> np.ndarray:
    n = quat_norm(q)
    if n == 0.0 or not math.isfinite(n):
        raise InvalidPoseError(f"cannot normalize quaternion {q!r}")
    return np.asarray(q, dtype=float) / n


def canonical(q) -> np.ndarray:
    """Return the hemisphere representative with w >= 0 (ties: first nonzero component positive)."""
    q = np.asarray(q, dtype=float)
    for c in q:
        if abs(c) > 1e-15:
            return q if c > 0 else -q
    return q


def quat_distance(q1, q2) -> float:
    """min(|q1 - q2|, |q1 + q2|); invariant to the double cover."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    return min(float(np.linalg.norm(q1 - q2)), float(np.linalg.norm(q1 + q2)))


def rotation_angle(q) -> float:
    """Geodesic rotation angle in [0, pi] of a unit quaternion."""
    return 2.0 * math.atan2(float(np.linalg.norm(q[1:])), abs(float(q[0])))


def angle_between(q1, q2) -> float:
    return rotation_angle(hamilton(conjugate(q1), q2))


def euler_to_quat(e) -> np.ndarray:
    """Intrinsic yaw (Z), pitch (Y), roll (X) to a unit quaternion."""
    roll, pitch, yaw = e
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    q = np.array([
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ])
    return canonical(normalize(q))


def axis_angle_quat(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = float(np.linalg.norm(axis))
    if n < 1e-12:
        raise DegenerateAxisError("rotation axis has zero length")
    axis = axis / n
    s = math.sin(angle / 2)
    return canonical(np.array([math.cos(angle / 2), *(axis * s)]))


def rotate_vector(r, v) -> np.ndarray:
    """Sandwich product r (0, v) r*."""
    return hamilton(hamilton(r, np.array([0.0, *v])), conjugate(r))[1:]


def slerp(q0, q1, t: float) -> np.ndarray:
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    d = float(np.dot(q0, q1))
    if d < 0:
        q1, d = -q1, -d
    if d > 1 - 1e-12:
        return normalize(q0 + t * (q1 - q0))
    th = math.acos(min(1.0, d))
    s = math.sin(th)
    return normalize((math.sin((1 - t) * th) * q0 + math.sin(t * th) * q1) / s)


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform; ``rotation`` is a unit quaternion, ``translation`` a 3-vector."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(4)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise InvalidPoseError("pose components must be finite")
        if abs(quat_norm(r) - 1.0) > UNIT_TOL:
            raise InvalidPoseError(f"rotation is not unit (norm {quat_norm(r)!r})")
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @property
    def real(self) -> np.ndarray:
        return self.rotation

    @property
    def dual(self) -> np.ndarray:
        return 0.5 * hamilton(np.array([0.0, *self.translation]), self.rotation)

    @classmethod
    def from_dual(cls, real, dual) -> "Pose":
        real = np.asarray(real, dtype=float)
        if abs(quat_norm(real) - 1.0) > UNIT_TOL:
            raise InvalidPoseError("real part is not a unit quaternion")
        if abs(float(np.dot(real, dual))) > UNIT_TOL:
            raise InvalidPoseError("dual part violates the Pluecker condition")
        t = 2.0 * hamilton(dual, conjugate(real))
        return cls(real, t[1:])

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation.tobytes()))

    def __repr__(self):
        return f"Pose(r={self.rotation.tolist()}, p={self.translation.tolist()})"

    def to_dict(self, key: str = "p") -> dict:
        return {"r": self.rotation.tolist(), key: self.translation.tolist()}


IDENTITY_POSE = Pose(IDENTITY_QUAT, np.zeros(3))


def pose_from(p, r) -> Pose:
    return Pose(r, p)


def pose_to(D: Pose):
    return D.translation.copy(), D.rotation.copy()


def pose_compose(D1: Pose, D2: Pose) -> Pose:
    """Dual-quaternion product D1 * D2 (apply D2 in the frame of D1)."""
    real = hamilton(D1.real, D2.real)
    dual = hamilton(D1.real, D2.dual) + hamilton(D1.dual, D2.real)
    t = 2.0 * hamilton(dual, conjugate(real))[1:]
    n = quat_norm(real)
    if abs(n - 1.0) > _RENORM_TOL:
        real = real / n
    return Pose(real, t)


def pose_conjugate(D: Pose) -> Pose:
    """Quaternion conjugate of both parts; the inverse of a unit dual quaternion."""
    rc = conjugate(D.rotation)
    return Pose(rc, -rotate_vector(rc, D.translation))


def pose_distance(D1: Pose, D2: Pose):
    """(position error, rotation distance) between two poses."""
    return (float(np.linalg.norm(D1.translation - D2.translation)),
            quat_distance(D1.rotation, D2.rotation))


def interpolate(D1: Pose, D2: Pose, t: float) -> Pose:
    """Linear position / shortest-arc rotation blend."""
    p = (1 - t) * D1.translation + t * D2.translation
    r = slerp(D1.rotation, D2.rotation, t)
    if np.dot(r, D1.rotation) < 0:
        r = -r
    return Pose(r, p)


def quat_from_dict(r) -> np.ndarray:
    return np.asarray(r, dtype=float).reshape(4)
