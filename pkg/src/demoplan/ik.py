"""Differential inverse kinematics over position + quaternion task coordinates.

The task coordinate is gamma = (p, r) in R^7. Its rate maps to the spatial
twist (w, v) through w = 2 J1 r_dot and v = p_dot - w x p, and the twist
maps to joint rates through a damped pseudoinverse of the spatial Jacobian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import MappingError, NoConvergenceError, SingularityError
from .geom import Pose, angle_between, interpolate, pose_distance
from .robot import JointTrajectory, RobotModel, check_limits, forward_kinematics, spatial_jacobian

_COND_LIMIT = 1e10
# Newton iterations spent on each intermediate target; these only guide the
# final solve, so a few are enough.
_GUIDE_ITERATIONS = 3


@dataclass(frozen=True)
class IKConfig:
    h: float = 0.01
    damping: float = 1e-6
    position_tol: float = 1e-5
    rotation_tol: float = 1e-5
    max_substeps: int = 10
    max_iterations: int = 50
    max_rotation_step: float = 0.175
    max_translation_step: float = 0.05

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("time step h must be positive")
        if self.damping < 0:
            raise ValueError("damping must be non-negative")


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def j1_matrix(r) -> np.ndarray:
    """3x4 map with spatial angular velocity w = 2 J1 r_dot."""
    w, v = float(r[0]), np.asarray(r[1:], dtype=float)
    return np.hstack([-v[:, None], w * np.eye(3) + skew(v)])


def j2_matrix(p, r) -> np.ndarray:
    """6x7 map from (p_dot, r_dot) to the spatial twist (w, v)."""
    J1 = j1_matrix(r)
    out = np.zeros((6, 7))
    out[:3, 3:] = 2.0 * J1
    out[3:, :3] = np.eye(3)
    out[3:, 3:] = 2.0 * skew(p) @ J1
    return out


def b_matrix(m: RobotModel, q, p, r, damping: float = 1e-6) -> np.ndarray:
    Js = spatial_jacobian(m, q)
    G = Js @ Js.T
    if damping == 0.0:
        if np.linalg.cond(G) > _COND_LIMIT:
            raise SingularityError("spatial Jacobian is singular and no damping is set")
    else:
        G = G + damping * np.eye(6)
    return Js.T @ np.linalg.solve(G, j2_matrix(p, r))


def _gamma(D: Pose, ref=None) -> np.ndarray:
    r = np.asarray(D.rotation, dtype=float)
    if ref is not None and np.dot(r, ref) < 0:
        r = -r
    return np.concatenate([D.translation, r])


def _converged(D: Pose, target: Pose, cfg: IKConfig) -> bool:
    dp, dr = pose_distance(D, target)
    return dp <= cfg.position_tol and dr <= cfg.rotation_tol


def _iterate(m: RobotModel, q: np.ndarray, target: Pose, cfg: IKConfig, strict: bool = True) -> np.ndarray:
    for _ in range(cfg.max_iterations if strict else min(cfg.max_iterations, _GUIDE_ITERATIONS)):
        D = forward_kinematics(m, q)
        if _converged(D, target, cfg):
            return q
        now = _gamma(D)
        goal = _gamma(target, now[3:])
        B = b_matrix(m, q, D.translation, D.rotation, cfg.damping)
        q = q + B @ (goal - now)
    if not strict or _converged(forward_kinematics(m, q), target, cfg):
        return q
    raise NoConvergenceError("differential IK did not reach the target within the iteration budget")


def _substeps(a: Pose, b: Pose, cfg: IKConfig) -> int:
    """Number of equal pieces (a power of two) that keeps each piece within the step caps."""
    ratio = max(angle_between(a.rotation, b.rotation) / cfg.max_rotation_step,
                float(np.linalg.norm(a.translation - b.translation)) / cfg.max_translation_step)
    return 1 if ratio <= 1.0 else 2 ** math.ceil(math.log2(ratio))


def resolve_step(m: RobotModel, q, target: Pose, cfg: IKConfig = IKConfig()) -> np.ndarray:
    """Joint vector reaching ``target`` from ``q``, splitting large displacements.

    A displacement beyond the step caps is halved repeatedly, up to
    ``max_substeps`` times. The intermediate targets interpolate in task space
    and may lie off the reachable set of an arm with fewer than six joints, so
    they are tracked best-effort and only the final target must meet the
    tolerances.
    """
    q = np.asarray(q, dtype=float).copy()
    start = forward_kinematics(m, q)
    pieces = _substeps(start, target, cfg)
    if pieces > 2 ** cfg.max_substeps:
        raise NoConvergenceError("displacement still too large after the maximum number of substeps")
    for i in range(1, pieces):
        q = _iterate(m, q, interpolate(start, target, i / pieces), cfg, strict=False)
    return _iterate(m, q, target, cfg)


def solve_pose(m: RobotModel, target: Pose, cfg: IKConfig = IKConfig(), seeds=None,
               n_random: int = 32, seed: int = 0) -> np.ndarray:
    """Initial joint vector for ``target`` by continuation from several seeds.

    Solutions inside the joint limits win over those outside.
    """
    rng = np.random.default_rng(seed)
    lo = np.array([l[0] for l in m.limits])
    hi = np.array([l[1] for l in m.limits])
    candidates = [np.asarray(s, dtype=float) for s in (seeds or [])]
    candidates.append(np.zeros(m.dof))
    span = np.minimum(hi - lo, 2 * np.pi)
    mid = 0.5 * (lo + hi)
    candidates += [mid + (rng.random(m.dof) - 0.5) * span for _ in range(n_random)]
    loose = replace(cfg, max_substeps=max(cfg.max_substeps, 16))
    fallback = None
    for c in candidates:
        try:
            sol = resolve_step(m, c, target, loose)
        except (NoConvergenceError, SingularityError, np.linalg.LinAlgError):
            continue
        if np.all(sol >= lo) and np.all(sol <= hi):
            return sol
        fallback = sol if fallback is None else fallback
    if fallback is not None:
        return fallback
    raise NoConvergenceError("no seed reached the requested pose")


def track_plan(m: RobotModel, q0, plan, cfg: IKConfig = IKConfig()):
    """Resolve every waypoint in order; returns (JointTrajectory, LimitReport)."""
    waypoints = plan.waypoints if hasattr(plan, "waypoints") else list(plan)
    q = np.asarray(q0, dtype=float)
    if not waypoints:
        raise MappingError("plan has no waypoints")
    start = forward_kinematics(m, q)
    dp, dr = pose_distance(start, waypoints[0])
    if dp > 1e-3 or dr > 1e-3:
        raise MappingError(f"initial joints are {dp:.3g} m / {dr:.3g} away from the first waypoint")
    q = resolve_step(m, q, waypoints[0], cfg)
    samples = [q]
    for w in waypoints[1:]:
        q = resolve_step(m, q, w, cfg)
        samples.append(q)
    traj = JointTrajectory(np.array(samples), cfg.h)
    return traj, check_limits(m, traj)
