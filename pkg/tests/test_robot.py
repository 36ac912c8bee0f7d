import json
import math

import numpy as np
import pytest

from demoplan.errors import DimensionMismatchError, SchemaError
from demoplan.geom import pose_compose, pose_conjugate, rotation_angle
from demoplan.robot import (DHRow, JointTrajectory, RobotModel, check_limits, forward_kinematics,
                            load_robot, spatial_jacobian)


def dh_matrix(a, alpha, d, theta):
    """Classic DH link transform written out element by element."""
    ct, st, ca, sa = math.cos(theta), math.sin(theta), math.cos(alpha), math.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0, sa, ca, d],
        [0, 0, 0, 1],
    ])


def fk_matrix(m, q):
    T = np.eye(4)
    for row, qi in zip(m.joints, q):
        T = T @ dh_matrix(row.a, row.alpha, row.d, qi + row.theta_offset)
    return T


def quat_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def one_link(a=0.0, d=0.0):
    return RobotModel("1R", (DHRow(a, 0.0, d),), ((-math.pi, math.pi),))


class TestForwardKinematics:
    def test_single_joint_identity(self):
        D = forward_kinematics(one_link(), [0.0])
        assert np.allclose(D.translation, 0) and np.allclose(D.rotation, [1, 0, 0, 0])

    def test_single_link(self):
        m = one_link(a=1.0)
        assert np.allclose(forward_kinematics(m, [0.0]).translation, (1, 0, 0))
        D = forward_kinematics(m, [math.pi / 2])
        assert np.allclose(D.translation, (0, 1, 0), atol=1e-12)
        assert rotation_angle(D.rotation) == pytest.approx(math.pi / 2)
        assert D.rotation[3] > 0

    def test_matches_matrix_oracle(self, robot, rng):
        for _ in range(100):
            q = rng.uniform(-math.pi, math.pi, robot.dof)
            D = forward_kinematics(robot, q)
            T = fk_matrix(robot, q)
            assert np.allclose(D.translation, T[:3, 3], atol=1e-9)
            assert np.allclose(quat_matrix(D.rotation), T[:3, :3], atol=1e-9)

    def test_dimension_mismatch(self, robot):
        with pytest.raises(DimensionMismatchError):
            forward_kinematics(robot, [0.0, 0.0])


class TestJacobian:
    def test_single_joint_column(self):
        J = spatial_jacobian(one_link(), [0.3])
        assert np.allclose(J[:, 0], [0, 0, 1, 0, 0, 0])

    def test_finite_differences(self, robot, rng):
        h = 1e-6
        worst = 0.0
        for _ in range(30):
            q = rng.uniform(-math.pi, math.pi, robot.dof)
            J = spatial_jacobian(robot, q)
            for i in range(robot.dof):
                e = np.zeros(robot.dof)
                e[i] = h
                Dp, Dm = forward_kinematics(robot, q + e), forward_kinematics(robot, q - e)
                rel = pose_compose(Dp, pose_conjugate(Dm))  # spatial increment over 2h
                r = rel.rotation if rel.rotation[0] >= 0 else -rel.rotation
                w = 2 * r[1:] / (2 * h)
                p0 = forward_kinematics(robot, q).translation
                v = (Dp.translation - Dm.translation) / (2 * h) - np.cross(w, p0)
                worst = max(worst, np.abs(np.concatenate([w, v]) - J[:, i]).max())
        assert worst < 1e-5

    def test_rank_bounded(self, robot, rng):
        J = spatial_jacobian(robot, rng.uniform(-1, 1, robot.dof))
        assert J.shape == (6, robot.dof)
        assert np.linalg.matrix_rank(J) <= min(6, robot.dof)


class TestLimits:
    def test_inside(self, robot):
        assert len(check_limits(robot, JointTrajectory(np.zeros((3, robot.dof))))) == 0

    def test_one_violation(self, robot):
        q = np.zeros((2, robot.dof))
        q[1, 2] = robot.limits[2][1] + 0.1
        rep = check_limits(robot, JointTrajectory(q))
        assert len(rep) == 1
        assert rep.worst_excess == pytest.approx(0.1)
        assert (rep.violations[0].step, rep.violations[0].joint) == (1, 2)

    def test_count_matches_scan(self, robot, rng):
        q = rng.uniform(-8, 8, (50, robot.dof))
        lo = np.array([l[0] for l in robot.limits])
        hi = np.array([l[1] for l in robot.limits])
        expected = int(np.sum((q < lo) | (q > hi)))
        assert len(check_limits(robot, JointTrajectory(q))) == expected


class TestRobotFile:
    def test_roundtrip(self, robot, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps(robot.to_dict()))
        assert load_robot(path) == robot

    def test_bad_limits(self):
        with pytest.raises(SchemaError):
            RobotModel("x", (DHRow(0, 0, 0),), ((1.0, 0.0),))
        with pytest.raises(SchemaError):
            RobotModel.from_dict({"dh": [{"a": 0}], "limits": []})

    def test_csv(self):
        text = JointTrajectory(np.zeros((2, 2)), 0.5).to_csv().splitlines()
        assert text[0] == "t,q1,q2"
        assert text[2].startswith("0.5,")
