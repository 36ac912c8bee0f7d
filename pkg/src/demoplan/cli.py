"""Command-line front end.

Exit codes: 0 success, 1 input or computation error, 2 acceptance check
failed, 3 a demonstration is requested.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .errors import DemoplanError
from .ik import IKConfig, solve_pose, track_plan
from .library import Library, extract_feature, library_load, library_save, load_demo_file
from .mapper import MotionPlan
from .planner import DemoRequest, QTable, TrainingConfig, generate_plan, train
from .robot import load_robot
from .similarity import SimilarityConfig
from .synthetic import random_training_tasks
from .task import parse_task

EXIT_OK, EXIT_ERROR, EXIT_ACCEPTANCE, EXIT_DEMO_REQUEST = 0, 1, 2, 3
CONFIG_ENV = "DEMOPLAN_CONFIG"


def load_scenario(path=None) -> dict:
    """Scenario file named by ``path`` or the environment; empty when neither is set."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise DemoplanError("scenario file must hold a JSON object")
    return doc


def _pick(flag, scenario: dict, section: str, key: str, default):
    if flag is not None:
        return flag
    return scenario.get(section, {}).get(key, default) if section else scenario.get(key, default)


def similarity_config(args, sc: dict) -> SimilarityConfig:
    d = SimilarityConfig()
    return SimilarityConfig(
        _pick(args.delta_alpha, sc, "similarity", "delta_alpha", d.delta_alpha),
        _pick(args.delta_beta, sc, "similarity", "delta_beta", d.delta_beta),
        sc.get("similarity", {}).get("zero_translation_epsilon", d.zero_translation_epsilon))


def training_config(args, sc: dict) -> TrainingConfig:
    d = TrainingConfig()
    return TrainingConfig(
        gamma=_pick(args.gamma, sc, "training", "gamma", d.gamma),
        epsilon=_pick(args.epsilon, sc, "training", "epsilon", d.epsilon),
        learning_rate=_pick(args.alpha_lr, sc, "training", "learning_rate", d.learning_rate),
        episodes=_pick(args.episodes, sc, "training", "episodes", d.episodes),
        r_fail=sc.get("training", {}).get("r_fail", d.r_fail),
        seed=_pick(args.seed, sc, "", "seed", d.seed))


def _path(flag, sc: dict, key: str, required: bool = True):
    value = flag if flag is not None else sc.get(key)
    if value is None and required:
        raise DemoplanError(f"--{key} is required (flag or scenario file)")
    return value


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)


def cmd_demo_import(args, sc: dict) -> int:
    lib_path = Path(_path(args.library, sc, "library"))
    robot = load_robot(_path(args.robot, sc, "robot", required=False))
    demo = load_demo_file(args.demo, robot, args.name, args.densify)
    lib = library_load(lib_path) if lib_path.exists() else Library()
    feature = extract_feature(demo)
    lib.add(feature)
    library_save(lib, lib_path)
    print(json.dumps({"name": feature.name, "poses": len(demo.poses), "deltas": len(feature.deltas),
                      "library_size": len(lib), "library_version": lib.version}))
    return EXIT_OK


def cmd_train(args, sc: dict) -> int:
    lib = library_load(_path(args.library, sc, "library"))
    cfg = training_config(args, sc)
    sim = similarity_config(args, sc)
    if args.task:
        tasks = [parse_task(Path(p).read_bytes()) for p in args.task]
    else:
        n = _pick(args.tasks_n, sc, "", "tasks_n", 20)
        if n <= 0:
            raise DemoplanError("--tasks-n must be positive")
        tasks = random_training_tasks(n, cfg.seed, float(sc.get("workspace", 0.5)))
    q0 = QTable.load(args.init) if args.init else None
    q, curve = train(tasks, lib, cfg, sim, q0)
    q.save(_path(args.qtable, sc, "qtable"))
    _write(args.out, curve.to_csv())
    return EXIT_OK


def cmd_plan(args, sc: dict) -> int:
    task = parse_task(Path(args.task[0]).read_bytes())
    lib = library_load(_path(args.library, sc, "library"))
    q = QTable.load(_path(args.qtable, sc, "qtable"))
    result = generate_plan(task, lib, q, similarity_config(args, sc))
    _write(args.out, json.dumps(result.to_dict(), indent=1))
    if isinstance(result, DemoRequest):
        segs = ", ".join(f"con_{j + 1}..con_{k + 1}" for j, k in result.segments)
        print(f"demonstration requested for {segs}", file=sys.stderr)
        return EXIT_DEMO_REQUEST
    return EXIT_OK


def cmd_ik(args, sc: dict) -> int:
    robot = load_robot(_path(args.robot, sc, "robot", required=False))
    plan = MotionPlan.from_dict(json.loads(Path(args.plan).read_text()))
    cfg = IKConfig()
    if args.q0:
        q0 = np.array([float(v) for v in args.q0.split(",")])
    else:
        q0 = solve_pose(robot, plan.waypoints[0], cfg)
    traj, report = track_plan(robot, q0, plan, cfg)
    _write(args.out, traj.to_csv())
    text = json.dumps(report.to_dict(), indent=1)
    if args.limits_out:
        Path(args.limits_out).write_text(text)
    else:
        print(text, file=sys.stderr)
    return EXIT_OK


def cmd_reproduce(args, sc: dict) -> int:
    cfg = training_config(args, sc)
    sim = similarity_config(args, sc)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    case = args.case
    if case == "training-curve":
        res = experiments.training_curve(cfg, sim, _pick(args.tasks_n, sc, "", "tasks_n", 20))
    elif case == "transferring":
        res = experiments.transferring(args.trials, cfg, sim)
    elif case == "filling":
        res = experiments.filling_pouring(args.trials, cfg, sim)
    else:
        res = experiments.assembling(cfg, sim)
    if out:
        for name, curve in res.curves.items():
            (out / f"{case}_{name}_curve.csv").write_text(curve.to_csv())
        plans = [p.to_dict() for p in res.plans]
        if plans:
            (out / f"{case}_plans.json").write_text(json.dumps(plans, indent=1))
    for c in res.checks:
        print(c.line())
    return EXIT_OK if res.passed else EXIT_ACCEPTANCE


def cmd_synth(args, sc: dict) -> int:
    from . import synthetic
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for make in synthetic.BASE_DEMOS + (synthetic.twist_x,):
        d = make()
        (out / f"demo_{d.name}.json").write_text(json.dumps(synthetic.demo_to_dict(d), indent=1))
    tasks = [synthetic.slide_turn_task(), synthetic.transferring_task(), synthetic.filling_pouring_task(),
             synthetic.assembling_task()]
    for t in tasks:
        (out / f"task_{t.name}.json").write_text(json.dumps(t.to_dict(), indent=1))
    print(f"wrote {len(synthetic.BASE_DEMOS) + 1} demos and {len(tasks)} tasks to {out}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--robot")
    p.add_argument("--library")
    p.add_argument("--task", action="append")
    p.add_argument("--qtable")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--delta-alpha", type=float)
    p.add_argument("--delta-beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha-lr", type=float)
    p.add_argument("--tasks-n", type=int)
    p.add_argument("--config", help=f"scenario file (defaults to ${CONFIG_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="demoplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-import", help="add a demonstration's feature to a library file")
    p.add_argument("demo", help="demo file (joint samples or poses)")
    p.add_argument("--name")
    p.add_argument("--densify", type=float, metavar="RAD",
                   help="resample joint demos so rotation steps stay below RAD")
    _common(p)
    p.set_defaults(func=cmd_demo_import)

    p = sub.add_parser("train", help="train a Q-table; writes the reward curve CSV to --out")
    p.add_argument("--init", help="Q-table to continue training from")
    _common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("plan", help="generate a motion plan or a demonstration request")
    _common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("ik", help="track a plan file in joint space")
    p.add_argument("--plan", required=True)
    p.add_argument("--q0", help="comma-separated initial joints (solved when omitted)")
    p.add_argument("--limits-out")
    _common(p)
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("synth", help="write the synthetic demo and case-study task files")
    _common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("reproduce", help="run a case study and check its acceptance assertions")
    p.add_argument("case", choices=["transferring", "filling", "assembling", "training-curve"])
    p.add_argument("--trials", type=int, default=20)
    _common(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config)
        if args.command == "plan" and not args.task:
            raise DemoplanError("--task is required")
        return args.func(args, sc)
    except (DemoplanError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
