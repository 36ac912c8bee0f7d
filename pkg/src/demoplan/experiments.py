"""Case-study runs on synthetic demonstrations, shared by the CLI and the tests."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geom import euler_to_quat, quat_distance
from .library import Library, extract_feature
from .mapper import MotionPlan
from .planner import (DemoRequest, QTable, RewardCurve, TrainingConfig, generate_plan, train)
from .similarity import SimilarityConfig
from .synthetic import (HALF, assembling_task, base_library, filling_pouring_task,
                        random_training_tasks, transferring_task, twist_x)

TWISTING = ("screwing1", "screwing2")
PLATEAU_START = 50
PLATEAU_WINDOW = 20
PLATEAU_TOL = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class CaseResult:
    checks: list = field(default_factory=list)
    plans: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def trailing_means(values, window: int = PLATEAU_WINDOW) -> list:
    v = np.asarray(values, dtype=float)
    return [float(v[s:s + window].mean()) for s in range(len(v) - window + 1)]


def plateau_ok(values, start: int = PLATEAU_START, window: int = PLATEAU_WINDOW,
               tol: float = PLATEAU_TOL) -> bool:
    """Trailing-window means are non-decreasing for windows starting at episode >= ``start`` (1-based)."""
    means = trailing_means(values, window)[start - 1:]
    return all(b >= a - tol for a, b in zip(means, means[1:]))


def settled_by(values, episode: int, tol: float = PLATEAU_TOL) -> bool:
    """Every value from ``episode`` (1-based) on equals the final one."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.abs(v[episode - 1:] - v[-1]) <= tol))


def pretrain(lib: Library, cfg: TrainingConfig, simcfg: SimilarityConfig, n_tasks: int = 20,
             workspace: float = 0.5):
    tasks = random_training_tasks(n_tasks, cfg.seed, workspace)
    return train(tasks, lib, cfg, simcfg)


def training_curve(cfg: TrainingConfig = TrainingConfig(), simcfg: SimilarityConfig = SimilarityConfig(),
                   n_tasks: int = 20, lib: Library | None = None) -> CaseResult:
    lib = lib or base_library()
    q, curve = pretrain(lib, cfg, simcfg, n_tasks)
    ok = plateau_ok(curve.greedy)
    res = CaseResult(curves={"training": curve}, extra={"qtable": q})
    res.checks.append(Check("training plateau", ok,
                            f"trailing-{PLATEAU_WINDOW} mean non-decreasing from episode {PLATEAU_START}; "
                            f"final average {curve.greedy[-1]:.6g}"))
    return res


def _trial_plan(task, lib, q0: QTable, cfg: TrainingConfig, simcfg: SimilarityConfig):
    q, _ = train([task], lib, cfg, simcfg, q0)
    return generate_plan(task, lib, q, simcfg)


def transferring(trials: int = 20, cfg: TrainingConfig = TrainingConfig(),
                 simcfg: SimilarityConfig = SimilarityConfig(), q0: QTable | None = None,
                 lib: Library | None = None) -> CaseResult:
    lib = lib or base_library()
    if q0 is None:
        q0, _ = pretrain(lib, cfg, simcfg)
    rng = np.random.default_rng(cfg.seed)
    upright = euler_to_quat((0.0, -HALF, 0.0))
    res = CaseResult()
    ok_plans, worst = 0, 0.0
    for _ in range(trials):
        plan = _trial_plan(transferring_task(float(rng.uniform(0.1, 0.5))), lib, q0, cfg, simcfg)
        res.plans.append(plan)
        if isinstance(plan, MotionPlan):
            err = max(quat_distance(w.rotation, upright) for w in plan.waypoints)
            worst = max(worst, err)
            ok_plans += err <= simcfg.delta_alpha
    res.checks.append(Check("transferring success", ok_plans == trials,
                            f"{ok_plans}/{trials} plans keep the cup upright "
                            f"(worst rotation distance {worst:.3g}, bound {simcfg.delta_alpha})"))
    return res


def segment_classes(plan: MotionPlan) -> list:
    return [(tuple(p["segment"]), p["demo"]) for p in plan.provenance]


def filling_pouring_ok(plan) -> bool:
    if not isinstance(plan, MotionPlan):
        return False
    segs = segment_classes(plan)
    return (len(segs) == 3
            and segs[0] == ((1, 2), "filling")
            and segs[1] == ((2, 4), "stacking")
            and segs[2][0] == (4, 5) and segs[2][1] in TWISTING)


def filling_pouring(trials: int = 20, cfg: TrainingConfig = TrainingConfig(),
                    simcfg: SimilarityConfig = SimilarityConfig(), q0: QTable | None = None,
                    lib: Library | None = None) -> CaseResult:
    lib = lib or base_library()
    if q0 is None:
        q0, _ = pretrain(lib, cfg, simcfg)
    rng = np.random.default_rng(cfg.seed)
    res = CaseResult()
    good = 0
    for _ in range(trials):
        task = filling_pouring_task(float(rng.uniform(-0.5, 0.7)), float(rng.uniform(-0.2, 0.0)))
        plan = _trial_plan(task, lib, q0, cfg, simcfg)
        res.plans.append(plan)
        good += filling_pouring_ok(plan)
    res.checks.append(Check("filling-and-pouring assignment", good == trials,
                            f"{good}/{trials} plans use filling [1,2], stacking [2,4], twisting [4,5]"))
    return res


def assembling(cfg: TrainingConfig = TrainingConfig(), simcfg: SimilarityConfig = SimilarityConfig(),
               q0: QTable | None = None, lib: Library | None = None,
               settle_episode: int = 15) -> CaseResult:
    lib = (lib or base_library()).snapshot()
    if q0 is None:
        q0, _ = pretrain(lib, cfg, simcfg)
    task = assembling_task()
    res = CaseResult()
    q1, before_curve = train([task], lib, cfg, simcfg, q0)
    first = generate_plan(task, lib, q1, simcfg)
    requested = [[j + 1, k + 1] for j, k in first.segments] if isinstance(first, DemoRequest) else []
    res.plans.append(first)
    res.checks.append(Check("assembling demo request", requested == [[2, 3]],
                            f"five-feature library requests segments {requested}"))
    lib.add(extract_feature(twist_x()))
    q2, curve = train([task], lib, cfg, simcfg, q1)
    second = generate_plan(task, lib, q2, simcfg)
    res.plans.append(second)
    res.curves = {"before": before_curve, "retrain": curve}
    res.extra = {"library": lib, "qtable": q2}
    ok = isinstance(second, MotionPlan)
    detail = (f"segments {segment_classes(second)}" if ok else "still requesting a demonstration")
    res.checks.append(Check("assembling after new demo", ok, detail))
    settled = settled_by(curve.greedy, settle_episode)
    res.checks.append(Check("assembling retrain plateau", settled,
                            f"greedy reward constant from episode {settle_episode} "
                            f"(final {curve.greedy[-1]:.6g})"))
    return res


def curve_csv(curve: RewardCurve) -> str:
    return curve.to_csv()
