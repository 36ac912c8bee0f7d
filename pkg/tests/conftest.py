import math

import numpy as np
import pytest

from demoplan.geom import Pose, axis_angle_quat
from demoplan.robot import load_robot
from demoplan.synthetic import base_library

S2 = math.sqrt(0.5)


def random_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def random_pose(rng, scale=1.0):
    return Pose(random_quat(rng), rng.normal(size=3) * scale)


def small_rotation(rng, max_angle):
    return axis_angle_quat(rng.normal(size=3), rng.uniform(0, max_angle))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def robot():
    return load_robot()


@pytest.fixture
def lib():
    return base_library()


# One PASS/FAIL line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
