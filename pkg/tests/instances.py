"""Random desk-scale (task, library) instances for oracle comparisons."""
import math

import numpy as np

from demoplan.geom import IDENTITY_QUAT, Pose, axis_angle_quat, pose_compose
from demoplan.library import Demonstration, Library, extract_feature
from demoplan.task import CriticalConfiguration, Task


def euler_of(q):
    w, x, y, z = q
    roll = math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
    pitch = math.asin(max(-1.0, min(1.0, 2 * (w * y - z * x))))
    yaw = math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
    return roll, pitch, yaw


def random_rotation(rng, max_angle):
    return axis_angle_quat(rng.normal(size=3), rng.uniform(0, max_angle))


def random_task(rng, n):
    poses = [Pose(IDENTITY_QUAT, np.zeros(3))]
    for _ in range(n - 1):
        poses.append(pose_compose(poses[-1], Pose(random_rotation(rng, 1.2), rng.normal(size=3) * 0.2)))
    return Task("random", tuple(CriticalConfiguration.pinned(P.translation, euler_of(P.rotation))
                                for P in poses))


def random_instance(rng, n_range=(3, 6), h_range=(2, 7), noise=0.25):
    """A task plus a library of noisy re-recordings of random task segments.

    Each demo replays a segment from a random base frame with a small random
    tool-frame twist, so some segments match at nonzero cost and some do not.
    """
    task = random_task(rng, int(rng.integers(*n_range)))
    poses = task.poses()
    n = len(poses)
    lib = Library()
    for i in range(int(rng.integers(*h_range))):
        j = int(rng.integers(0, n - 1))
        k = int(rng.integers(j + 1, n))
        frame = Pose(random_rotation(rng, 3.0), rng.normal(size=3))
        seg = [pose_compose(pose_compose(frame, p), Pose(random_rotation(rng, noise), np.zeros(3)))
               for p in poses[j:k + 1]]
        lib.add(extract_feature(Demonstration(f"d{i}", tuple(seg))))
    return task, lib
