"""Rotation closeness, translation direction agreement and feature matching."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import Pose, quat_distance


@dataclass(frozen=True)
class SimilarityConfig:
    delta_alpha: float = 0.5
    delta_beta: float = -0.9
    zero_translation_epsilon: float = 1e-6

    def __post_init__(self):
        if self.delta_alpha < 0:
            raise ValueError("delta_alpha must be non-negative")
        if not -1.0 <= self.delta_beta <= 1.0:
            raise ValueError("delta_beta must lie in [-1, 1]")
        if self.zero_translation_epsilon <= 0:
            raise ValueError("zero_translation_epsilon must be positive")


@dataclass(frozen=True)
class Allocation:
    """Pairs (task delta index j, demo delta index l), both 0-based."""

    pairs: tuple

    def __post_init__(self):
        ls = [l for _, l in self.pairs]
        if any(b <= a for a, b in zip(ls, ls[1:])):
            raise ValueError("demo indices must be strictly increasing")

    def __len__(self):
        return len(self.pairs)


def alpha(d1: Pose, d2: Pose) -> float:
    return quat_distance(d1.rotation, d2.rotation)


def beta(d1: Pose, d2: Pose, cfg: SimilarityConfig = SimilarityConfig()) -> float:
    n1 = float(np.linalg.norm(d1.translation))
    n2 = float(np.linalg.norm(d2.translation))
    eps = cfg.zero_translation_epsilon
    small1, small2 = n1 < eps, n2 < eps
    if small1 and small2:
        return 1.0
    if small1 or small2:
        return -1.0
    c = float(np.dot(d1.translation, d2.translation)) / (n1 * n2)
    return max(-1.0, min(1.0, c))


def pair_ok(task_delta: Pose, demo_delta: Pose, cfg: SimilarityConfig) -> bool:
    return (alpha(demo_delta, task_delta) <= cfg.delta_alpha
            and beta(demo_delta, task_delta, cfg) >= cfg.delta_beta)


def is_semantically_similar(tf, hd, cfg: SimilarityConfig = SimilarityConfig()):
    """Greedy earliest strictly increasing allocation, or ``None``.

    ``tf`` is a TaskFeature (or a sequence of deltas); ``hd`` a DemoFeature,
    whose terminal identity delta takes part in the scan.
    """
    task_deltas = tuple(getattr(tf, "deltas", tf))
    demo_deltas = hd.matching_deltas
    if not task_deltas:
        raise ValueError("task feature is empty")
    pairs = []
    l = 0
    for j, td in enumerate(task_deltas):
        while l < len(demo_deltas) and not pair_ok(td, demo_deltas[l], cfg):
            l += 1
        if l == len(demo_deltas):
            return None
        pairs.append((j, l))
        l += 1
    return Allocation(tuple(pairs))


def allocation_cost(tf, hd, alloc: Allocation) -> float:
    """Sum of rotation distances over the allocated pairs."""
    task_deltas = tuple(getattr(tf, "deltas", tf))
    demo_deltas = hd.matching_deltas
    return sum(alpha(demo_deltas[l], task_deltas[j]) for j, l in alloc.pairs)
