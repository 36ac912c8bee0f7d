"""Tabular Q-learning over (demonstration, segment end) actions.

A state is the index j of the current critical configuration plus a
quantized description of the next two consecutive configuration pairs. An
action (i, k) applies library feature i to the segment from j to k. Indices
are 0-based in memory and 1-based in files and reports.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .geom import euler_to_quat, pose_compose, pose_conjugate, pose_distance, quat_distance
from .mapper import (MotionPlan, densify, goal_reachable, map_feature, match_table,
                     reconstruct_plan, uncovered_segments)
from .similarity import SimilarityConfig, allocation_cost, is_semantically_similar
from .synthetic import EULER_GRID
from .task import Task, relative_deltas

R_FAIL = -1e6
LOOKAHEAD = 2
TIE_TOL = 1e-9


def _rotation_grid() -> np.ndarray:
    grid = []
    for e in itertools.product(EULER_GRID, repeat=3):
        q = euler_to_quat(e)
        if all(quat_distance(q, g) > 1e-6 for g in grid):
            grid.append(q)
    return np.array(grid)


ROTATION_GRID = _rotation_grid()
_LATTICE = np.array([v for v in itertools.product((-1, 0, 1), repeat=3) if any(v)], dtype=float)
DIRECTION_GRID = _LATTICE / np.linalg.norm(_LATTICE, axis=1)[:, None]


def quantize_pair(a, b, eps: float = 1e-6) -> str:
    """Label for the relative transform between consecutive configurations."""
    d = pose_compose(pose_conjugate(a), b)
    n = float(np.linalg.norm(d.translation))
    t = "z" if n < eps else str(int(np.argmax(DIRECTION_GRID @ (d.translation / n))))
    dots = np.abs(ROTATION_GRID @ d.rotation)
    return f"{t}/{int(np.argmax(dots))}"


@dataclass(frozen=True)
class PlannerState:
    j: int
    key: str
    version: int = 0


def encode_state(task: Task, j: int, lib=None, poses=None) -> PlannerState:
    poses = poses if poses is not None else task.poses()
    n = len(poses)
    if not 0 <= j < n:
        raise ValueError(f"state index {j} outside task of {n} configurations")
    labels = [quantize_pair(poses[a], poses[a + 1]) for a in range(j, min(j + LOOKAHEAD, n - 1))]
    key = f"{j}|{n - 1 - j}|" + ";".join(labels)
    return PlannerState(j, key, lib.version if lib is not None else 0)


@dataclass(frozen=True)
class PlannerAction:
    demo: int
    end: int


def legal_actions(s: PlannerState, task: Task, lib, cfg: SimilarityConfig = SimilarityConfig()) -> list:
    poses = task.poses()
    out = []
    for k in range(s.j + 1, len(poses)):
        deltas = relative_deltas(poses[s.j:k + 1])
        for i, hd in enumerate(lib.features):
            if is_semantically_similar(deltas, hd, cfg) is not None:
                out.append(PlannerAction(i, k))
    return sorted(out, key=lambda a: (a.demo, a.end))


def reward(tf, hd, alloc) -> float:
    """Negative summed rotation distance of the allocated pairs; R_FAIL when unmatched."""
    if alloc is None:
        return R_FAIL
    return -allocation_cost(tf, hd, alloc)


@dataclass(frozen=True)
class TrainingConfig:
    gamma: float = 0.9
    epsilon: float = 0.8
    learning_rate: float = 0.5
    episodes: int = 100
    r_fail: float = R_FAIL
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")


@dataclass
class QTable:
    values: dict = field(default_factory=dict)  # (state key, (i, k)) -> q
    hyper: dict = field(default_factory=dict)

    def get(self, key: str, action) -> float:
        return self.values.get((key, tuple(action)), 0.0)

    def set(self, key: str, action, v: float) -> None:
        self.values[(key, tuple(action))] = float(v)

    def copy(self) -> "QTable":
        return QTable(dict(self.values), dict(self.hyper))

    def to_dict(self) -> dict:
        entries = [{"state": s, "action": [a[0] + 1, a[1] + 1], "q": v}
                   for (s, a), v in sorted(self.values.items())]
        return {"hyper": self.hyper, "entries": entries}

    @classmethod
    def from_dict(cls, doc: dict) -> "QTable":
        try:
            values = {(str(e["state"]), (int(e["action"][0]) - 1, int(e["action"][1]) - 1)): float(e["q"])
                      for e in doc["entries"]}
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise SchemaError(f"bad Q-table document: {exc}") from exc
        return cls(values, dict(doc.get("hyper", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "QTable":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"Q-table file is not JSON: {exc}") from exc


def q_update(q: QTable, s: str, a, r: float, next_values, cfg: TrainingConfig) -> QTable:
    """One temporal-difference step.

    ``next_values`` lists Q(s', a') over the legal actions of s'; ``None``
    marks a terminal s' (contributes 0) and an empty list a dead end
    (contributes ``cfg.r_fail``).
    """
    if next_values is None:
        future = 0.0
    elif len(next_values) == 0:
        future = cfg.r_fail
    else:
        future = max(next_values)
    old = q.get(s, a)
    q.set(s, a, (1 - cfg.learning_rate) * old + cfg.learning_rate * (r + cfg.gamma * future))
    return q


class _TaskContext:
    """Per-task cache: poses, match table, state keys and legal actions."""

    def __init__(self, task: Task, lib, cfg: SimilarityConfig):
        self.task = task
        self.poses = task.poses()
        self.n = len(self.poses)
        self.table = match_table(task, lib, cfg, self.poses)
        self.keys = [encode_state(task, j, lib, self.poses).key for j in range(self.n)]
        self.actions = [[] for _ in range(self.n)]
        for (j, k), matches in sorted(self.table.items()):
            for m in matches:
                self.actions[j].append(((m.demo, k), -m.cost, m))
        for acts in self.actions:
            acts.sort(key=lambda x: x[0])
        self.reach = goal_reachable(self.n, self.table)

    def legal(self, j: int) -> list:
        return self.actions[j]

    def viable(self, j: int) -> list:
        return [x for x in self.actions[j] if self.reach[x[0][1]]]


def _greedy(q: QTable, key: str, acts: list):
    """Best action; near-ties prefer the longer segment, then the lower demo index."""
    best = None
    best_v = -math.inf
    for x in acts:
        v = q.get(key, x[0])
        if best is None or v > best_v + TIE_TOL:
            best, best_v = x, v
        elif abs(v - best_v) <= TIE_TOL:
            (bi, bk), (i, k) = best[0], x[0]
            if k > bk or (k == bk and i < bi):
                best, best_v = x, max(v, best_v)
    return best


def greedy_path(ctx: _TaskContext, q: QTable):
    """Follow the greedy policy over goal-reaching actions; ``None`` if uncoverable."""
    if not ctx.reach[0]:
        return None
    j, path = 0, []
    while j < ctx.n - 1:
        choice = _greedy(q, ctx.keys[j], ctx.viable(j))
        path.append((j, choice))
        j = choice[0][1]
    return path


def _path_reward(path, r_fail: float, gamma: float = 1.0) -> float:
    if path is None:
        return r_fail
    return float(sum(gamma ** t * x[1] for t, (_, x) in enumerate(path)))


@dataclass
class RewardCurve:
    greedy: list = field(default_factory=list)
    behavior: list = field(default_factory=list)

    def __len__(self):
        return len(self.greedy)

    def to_csv(self) -> str:
        lines = ["episode,avg_reward,behavior"]
        for e, (g, b) in enumerate(zip(self.greedy, self.behavior)):
            lines.append(f"{e + 1},{g!r},{b!r}")
        return "\n".join(lines) + "\n"


def _episode(ctx: _TaskContext, q: QTable, cfg: TrainingConfig, rng: np.random.Generator) -> float:
    j, total = 0, 0.0
    while j < ctx.n - 1:
        acts = ctx.legal(j)
        if not acts:
            return total + cfg.r_fail
        if rng.random() < cfg.epsilon:
            choice = acts[int(rng.integers(len(acts)))]
        else:
            choice = _greedy(q, ctx.keys[j], acts)
        (i, k), r, _ = choice
        total += r
        if k == ctx.n - 1:
            nxt = None
        else:
            nxt = [q.get(ctx.keys[k], a[0]) for a in ctx.legal(k)]
        q_update(q, ctx.keys[j], (i, k), r, nxt, cfg)
        j = k
    return total


def train(tasks, lib, cfg: TrainingConfig = TrainingConfig(),
          simcfg: SimilarityConfig = SimilarityConfig(), q0: QTable | None = None):
    """Epsilon-greedy Q-learning, cycling through ``tasks`` once per episode."""
    tasks = list(tasks)
    if not tasks:
        raise ValueError("training needs at least one task")
    if len(lib) == 0:
        raise ValueError("training needs a nonempty library")
    q = q0.copy() if q0 is not None else QTable()
    q.hyper = {**asdict(cfg), **{f"sim_{k}": v for k, v in asdict(simcfg).items()},
               "library_version": lib.version}
    rng = np.random.default_rng(cfg.seed)
    contexts = [_TaskContext(t, lib, simcfg) for t in tasks]
    curve = RewardCurve()
    for _ in range(cfg.episodes):
        behavior = [_episode(ctx, q, cfg, rng) for ctx in contexts]
        greedy = [_path_reward(greedy_path(ctx, q), cfg.r_fail) for ctx in contexts]
        curve.behavior.append(float(np.mean(behavior)))
        curve.greedy.append(float(np.mean(greedy)))
    return q, curve


@dataclass
class DemoRequest:
    task: str
    segments: list  # (j, k) 0-based
    features: list  # task deltas per segment

    def to_dict(self) -> dict:
        return {"task": self.task, "demo_request": [
            {"segment": [j + 1, k + 1], "deltas": [d.to_dict("t") for d in f]}
            for (j, k), f in zip(self.segments, self.features)]}


def policy_reward(task: Task, lib, q: QTable, simcfg: SimilarityConfig = SimilarityConfig(),
                  r_fail: float = R_FAIL, gamma: float = 1.0) -> float:
    """Reward collected by the greedy policy (discounted when ``gamma`` < 1)."""
    return _path_reward(greedy_path(_TaskContext(task, lib, simcfg), q), r_fail, gamma)


def generate_plan(task: Task, lib, q: QTable, simcfg: SimilarityConfig = SimilarityConfig(),
                  max_step: float = 0.175):
    ctx = _TaskContext(task, lib, simcfg)
    path = greedy_path(ctx, q)
    if path is None:
        segs = uncovered_segments(ctx.n, ctx.table)
        return DemoRequest(task.name, segs, [relative_deltas(ctx.poses[j:k + 1]) for j, k in segs])
    waypoints, provenance = [], []
    for j, ((i, k), r, m) in path:
        hd = lib.features[i]
        tf = relative_deltas(ctx.poses[j:k + 1])
        mf = map_feature(hd, tf, m.allocation, simcfg, (j, k))
        seg = reconstruct_plan(ctx.poses[k], mf)
        if waypoints and max(pose_distance(waypoints[-1], seg[0])) < 1e-12:
            seg = seg[1:]
        waypoints.extend(seg)
        provenance.append({"segment": [j + 1, k + 1], "demo": hd.name,
                           "allocation": [[a + 1, b + 1] for a, b in m.allocation.pairs],
                           "reward": r})
    return MotionPlan(task.name, densify(waypoints, max_step), provenance)


def exhaustive_oracle(task: Task, lib, cfg: SimilarityConfig = SimilarityConfig(),
                      gamma: float = 1.0):
    """Best (segments, reward) over every segmentation and demo choice, or ``None``.

    The reward is the total over segments, or its discounted sum when
    ``gamma`` is below 1. Each segment is re-matched from scratch so the
    search shares no tables with the planner.
    """
    poses = task.poses()
    n = len(poses)
    best = None
    for cuts in itertools.product((False, True), repeat=n - 2):
        bounds = [0] + [c + 1 for c, keep in enumerate(cuts) if keep] + [n - 1]
        options = []
        for j, k in zip(bounds, bounds[1:]):
            deltas = relative_deltas(poses[j:k + 1])
            seg_opts = []
            for i, hd in enumerate(lib.features):
                alloc = is_semantically_similar(deltas, hd, cfg)
                if alloc is not None:
                    seg_opts.append((j, k, i, reward(deltas, hd, alloc)))
            if not seg_opts:
                break
            options.append(seg_opts)
        else:
            for combo in itertools.product(*options):
                total = sum(gamma ** t * c[3] for t, c in enumerate(combo))
                if best is None or total > best[1]:
                    best = ([c[:3] for c in combo], total)
    return best
