import math

import numpy as np
import pytest

from conftest import S2, random_pose
from demoplan.geom import Pose, axis_angle_quat, quat_distance
from demoplan.library import DemoFeature
from demoplan.similarity import (Allocation, SimilarityConfig, alpha, beta,
                                 is_semantically_similar, pair_ok)
from demoplan.synthetic import slide_turn_task
from demoplan.task import relative_deltas

CFG = SimilarityConfig()


def t(v, r=(1, 0, 0, 0)):
    return Pose(r, v)


def test_alpha():
    d = Pose((S2, 0, 0, -S2), (1, 2, 3))
    assert alpha(d, d) == 0.0
    assert alpha(t((0, 0, 0)), Pose((S2, 0, 0, -S2), (0, 0, 0))) == pytest.approx(0.7654, abs=1e-4)


def test_alpha_ignores_translation(rng):
    for _ in range(20):
        r = rng.normal(size=4)
        r /= np.linalg.norm(r)
        s = rng.normal(size=4)
        s /= np.linalg.norm(s)
        assert alpha(Pose(r, rng.normal(size=3)), Pose(s, rng.normal(size=3))) == quat_distance(r, s)


def test_alpha_symmetric_zero_iff_same(rng):
    a, b = random_pose(rng), random_pose(rng)
    assert alpha(a, b) == alpha(b, a) > 0
    assert alpha(a, Pose(-a.rotation, b.translation)) == 0.0


def test_beta_values():
    assert beta(t((1, 0, 0)), t((2, 0, 0))) == 1.0
    assert beta(t((1, 0, 0)), t((-1, 0, 0))) == -1.0
    assert beta(t((1, 0, 0)), t((0.7, 0, -0.7))) == pytest.approx(S2)


def test_beta_zero_conventions():
    assert beta(t((0, 0, 0)), t((0, 0, 1e-9))) == 1.0
    assert beta(t((0, 0, 0)), t((1, 0, 0))) == -1.0
    assert beta(t((1, 0, 0)), t((0, 0, 0))) == -1.0


def test_beta_scale_invariant(rng):
    a, b = rng.normal(size=3), rng.normal(size=3)
    assert beta(t(a), t(b)) == pytest.approx(beta(t(3.7 * a), t(0.2 * b)), abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        SimilarityConfig(delta_alpha=-1)
    with pytest.raises(ValueError):
        SimilarityConfig(delta_beta=2)
    with pytest.raises(ValueError):
        SimilarityConfig(zero_translation_epsilon=0)


def test_allocation_monotone():
    with pytest.raises(ValueError):
        Allocation(((0, 1), (1, 1)))


def test_self_match(rng):
    deltas = tuple(random_pose(rng) for _ in range(3))
    alloc = is_semantically_similar(deltas, DemoFeature("x", deltas), CFG)
    assert alloc.pairs == ((0, 0), (1, 1), (2, 2))


def test_slide_turn_last_segment_with_matching_demo():
    task = slide_turn_task()
    seg = relative_deltas(task.poses()[2:])
    demo = DemoFeature("hd2", (Pose((S2, 0, 0, -S2), seg[0].translation * 2),))
    alloc = is_semantically_similar(seg, demo, SimilarityConfig(0.5, 0.0))
    assert alloc is not None and alloc.pairs == ((0, 0),)


def test_pure_rotation_vs_translation_only():
    task = (Pose(axis_angle_quat((0, 0, 1), math.pi / 2), (0, 0, 0)),)
    demo = DemoFeature("slide", (t((1, 0, 0)), t((0.5, 0, 0))))
    assert is_semantically_similar(task, demo, CFG) is None


def test_terminal_identity_used():
    task = (t((1, 0, 0)), t((0, 0, 0)))
    demo = DemoFeature("one", (t((2, 0, 0)),))
    alloc = is_semantically_similar(task, demo, CFG)
    assert alloc.pairs == ((0, 0), (1, 1))


def test_empty_task_rejected():
    with pytest.raises(ValueError):
        is_semantically_similar((), DemoFeature("x", (t((1, 0, 0)),)), CFG)


def brute_force(task, demo, cfg):
    """Earliest allocation by exhaustive search over increasing index tuples."""
    from itertools import combinations
    md = demo.matching_deltas
    for combo in combinations(range(len(md)), len(task)):
        if all(pair_ok(td, md[l], cfg) for td, l in zip(task, combo)):
            return combo
    return None


def test_greedy_agrees_with_brute_force_existence(rng):
    cfg = SimilarityConfig(0.9, 0.0)
    for _ in range(300):
        task = tuple(Pose(axis_angle_quat(rng.normal(size=3), rng.uniform(0, 2)), rng.normal(size=3))
                     for _ in range(int(rng.integers(1, 4))))
        demo = DemoFeature("d", tuple(Pose(axis_angle_quat(rng.normal(size=3), rng.uniform(0, 2)),
                                           rng.normal(size=3)) for _ in range(int(rng.integers(1, 5)))))
        alloc = is_semantically_similar(task, demo, cfg)
        expected = brute_force(task, demo, cfg)
        assert (alloc is None) == (expected is None)
        if alloc is not None:
            assert tuple(l for _, l in alloc.pairs) == expected
            for j, l in alloc.pairs:
                assert pair_ok(task[j], demo.matching_deltas[l], cfg)


def test_monotone_in_delta_alpha(rng):
    for _ in range(200):
        task = (Pose(axis_angle_quat(rng.normal(size=3), rng.uniform(0, 2)), rng.normal(size=3)),)
        demo = DemoFeature("d", (Pose(axis_angle_quat(rng.normal(size=3), rng.uniform(0, 2)),
                                      rng.normal(size=3)),))
        if is_semantically_similar(task, demo, SimilarityConfig(0.3, -0.5)) is not None:
            assert is_semantically_similar(task, demo, SimilarityConfig(0.6, -0.5)) is not None
