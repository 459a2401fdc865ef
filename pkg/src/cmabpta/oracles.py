"""Exact oracles: map a parameter vector to a reward-maximizing super arm."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .environments import CascadingInstance
from .model import InstanceTooLargeError, ProblemInstance, SuperArm

DEFAULT_CAP = 10 ** 6


@dataclass(frozen=True)
class OracleResult:
    super_arm: SuperArm
    value: float


def cascading_slates(theta: np.ndarray, L: int, R: int, K: int) -> np.ndarray:
    """Top-K pages per user, by descending theta and then ascending page index."""
    theta = np.asarray(theta, dtype=float).reshape(L, R)
    # stable sort of -theta keeps lower page indices first among ties
    return np.argsort(-theta, axis=1, kind="stable")[:, :K]


def cascading_oracle(instance: CascadingInstance, theta) -> OracleResult:
    """Both cascade rewards are increasing symmetric functions of each user's
    chosen attractions, so the per-user top-K set is optimal."""
    theta = np.asarray(theta, dtype=float)
    arm = instance.make_super_arm(cascading_slates(theta, instance.L, instance.R, instance.K))
    return OracleResult(arm, instance.expected_reward(arm, theta))


def brute_force_oracle(instance: ProblemInstance, theta, cap: int = DEFAULT_CAP) -> OracleResult:
    """Exhaustive argmax over the feasible set; the first maximizer in
    enumeration order wins ties."""
    count = instance.feasible_count()
    if count > cap:
        raise InstanceTooLargeError(f"{count} feasible super arms exceed the cap of {cap}")
    best, best_value = None, -np.inf
    for arm in instance.feasible():
        value = instance.expected_reward(arm, theta)
        if value > best_value:
            best, best_value = arm, value
    return OracleResult(best, best_value)


def exact_oracle(instance: ProblemInstance) -> Callable[[np.ndarray], OracleResult]:
    """The fastest exact oracle available for ``instance``."""
    if isinstance(instance, CascadingInstance):
        return lambda theta: cascading_oracle(instance, theta)
    return lambda theta: brute_force_oracle(instance, theta)
