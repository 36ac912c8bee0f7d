"""Synthetic demonstrations and the case-study task builders.

Each demonstration starts at the identity pose and ends at a pose whose
rotation and translation are fixed by the motion it stands for. The
translation recorded in a reference feature table points from the goal back to
the waypoint, so a demo whose table entry reads "+x" travels along world -x.
Intermediate waypoints follow a shared schedule of remaining rotation
(90, 52, 23, 0 degrees for a quarter turn) with positions on a straight line.
"""
from __future__ import annotations

import math

import numpy as np

from .geom import (EulerAngles, IDENTITY_QUAT, Pose, axis_angle_quat, pose_compose, slerp)
from .library import Demonstration, Library, extract_feature
from .task import CriticalConfiguration, Task

PI = math.pi
HALF = PI / 2
# Fraction of the total motion still to go at each of the four waypoints.
REMAINING = (1.0, 52.0 / 90.0, 23.0 / 90.0, 0.0)
STEP_LENGTH = 0.3
EULER_GRID = (-PI, -HALF, 0.0, HALF, PI)
_S2 = math.sqrt(0.5)


def _schedule_demo(name: str, final_rotation, final_translation) -> Demonstration:
    t = np.asarray(final_translation, dtype=float)
    poses = []
    for f in REMAINING:
        done = 1.0 - f
        poses.append(Pose(slerp(IDENTITY_QUAT, final_rotation, done), done * t))
    return Demonstration(name, tuple(poses))


def screwing1() -> Demonstration:
    """Quarter turn clockwise about the tool axis while advancing."""
    return _schedule_demo("screwing1", axis_angle_quat((0, 0, 1), -HALF), (-STEP_LENGTH, 0, 0))


def screwing2() -> Demonstration:
    """Quarter turn anti-clockwise about the tool axis while advancing."""
    return _schedule_demo("screwing2", axis_angle_quat((0, 0, 1), HALF), (-STEP_LENGTH, 0, 0))


def filling() -> Demonstration:
    """Turn up a quarter turn about y while rising."""
    return _schedule_demo("filling", axis_angle_quat((0, 1, 0), HALF),
                          (-STEP_LENGTH * _S2, 0, STEP_LENGTH * _S2))


def pouring() -> Demonstration:
    """Turn down a quarter turn about y while lowering."""
    return _schedule_demo("pouring", axis_angle_quat((0, 1, 0), -HALF),
                          (STEP_LENGTH * _S2, 0, -STEP_LENGTH * _S2))


def stacking() -> Demonstration:
    """Lift, carry and lower a block with a fixed upright orientation."""
    end = np.array([0.2, 0.0, -0.2])
    rel = [(0.2, 0.0, -0.2), (0.1, 0.0, 0.1), (0.0, 0.0, 0.1), (0.0, 0.0, 0.0)]
    return Demonstration("stacking", tuple(Pose(IDENTITY_QUAT, np.array(p) - end) for p in rel))


def twist_x() -> Demonstration:
    """Quarter turn about the tool x axis while moving along tool -z (the extra demo)."""
    return _schedule_demo("twist_x", axis_angle_quat((1, 0, 0), HALF), (0, 0, -STEP_LENGTH))


BASE_DEMOS = (screwing1, screwing2, filling, pouring, stacking)


def base_library() -> Library:
    lib = Library()
    for make in BASE_DEMOS:
        lib.add(extract_feature(make()))
    return lib


def moved(d: Demonstration, frame: Pose) -> Demonstration:
    """The same demonstration performed from another base frame."""
    return Demonstration(d.name, tuple(pose_compose(frame, p) for p in d.poses))


def demo_to_dict(d: Demonstration) -> dict:
    return {"name": d.name, "poses": [p.to_dict("p") for p in d.poses]}


def _pinned(p, e) -> CriticalConfiguration:
    return CriticalConfiguration.pinned(p, e)


def slide_turn_task() -> Task:
    return Task("slide_turn", (
        _pinned((-0.2, 0, 0.6), (0, 0, 0)),
        _pinned((-0.3, 0, 0.6), (0, 0, 0)),
        _pinned((-0.4, 0, 0.6), (0, 0, 0)),
        _pinned((-0.5, 0, 0.6), (0, 0, -HALF)),
    ))


def transferring_task(z: float = 0.3) -> Task:
    e = (0, -HALF, 0)
    return Task("transferring", (
        _pinned((-0.5, 0, 0.3), e),
        _pinned((-0.4, 0.2, z), e),
        _pinned((0.0, 0.2, z), e),
        _pinned((0.1, 0, 0.3), e),
    ))


def _upright_free_yaw(p) -> CriticalConfiguration:
    return CriticalConfiguration(tuple(map(float, p)), ((0.0, 0.0), (-HALF, -HALF), (-PI, PI)),
                                 EulerAngles(0.0, -HALF, 0.0))


def filling_pouring_task(x: float = 0.1, y: float = -0.1) -> Task:
    return Task("filling_pouring", (
        _pinned((-0.4, -0.1, 0), (0, -PI, 0)),
        _upright_free_yaw((-0.5, 0.1, 0.1)),
        _upright_free_yaw((-0.7, -0.1, 0.1)),
        _upright_free_yaw((x, y, 0.1)),
        _pinned((x, y, 0), (HALF, 0, -HALF)),
    ))


def assembling_task() -> Task:
    return Task("assembling", (
        _pinned((0, 0.5, 0.6), (-HALF, 0, HALF)),
        _pinned((0.1, 0.5, 0.6), (0, -HALF, 0)),
        _pinned((0.5, 0.1, 0.6), (0, -HALF, HALF)),
        _pinned((0.5, 0, 0.6), (PI, 0, -HALF)),
    ))


def random_training_task(rng: np.random.Generator, name: str = "random", n: int = 4,
                         workspace: float = 0.5) -> Task:
    """Positions uniform in a cube of side ``workspace``; angles drawn from the Euler grid."""
    while True:
        cons = tuple(_pinned(rng.uniform(0.0, workspace, 3), rng.choice(EULER_GRID, 3))
                     for _ in range(n))
        try:
            return Task(name, cons)
        except ValueError:
            continue


def random_training_tasks(count: int, seed: int = 0, workspace: float = 0.5) -> list:
    rng = np.random.default_rng(seed)
    return [random_training_task(rng, f"train{k + 1}", workspace=workspace) for k in range(count)]
