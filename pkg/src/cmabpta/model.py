"""Shared vocabulary: super arms, observations, the problem-instance contract.

Base arms are integers in ``[0, m)``. Parameter and outcome vectors are plain
float arrays of length ``m``.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np


class CmabError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidArmError(CmabError):
    pass


class InvalidSuperArmError(CmabError):
    pass


class InfeasibleArmError(CmabError):
    pass


class InvalidParameterError(CmabError):
    pass


class InstanceTooLargeError(CmabError):
    pass


@dataclass(frozen=True)
class SuperArm:
    """An ordered tuple of distinct base arm ids.

    For cascading instances the tuple is slot-major per user: the first ``K``
    entries are user 0's slate in display order, the next ``K`` user 1's, etc.
    """

    arms: tuple[int, ...]

    def __post_init__(self):
        arms = tuple(int(a) for a in self.arms)
        if len(set(arms)) != len(arms):
            raise InvalidSuperArmError(f"duplicate base arms in {arms}")
        object.__setattr__(self, "arms", arms)

    def __iter__(self) -> Iterator[int]:
        return iter(self.arms)

    def __len__(self) -> int:
        return len(self.arms)

    def __contains__(self, arm) -> bool:
        return arm in self.arms


@dataclass(frozen=True)
class Observation:
    """Semi-bandit feedback: the outcomes of every triggered arm, nothing else."""

    arms: tuple[int, ...]
    outcomes: tuple[float, ...]

    @classmethod
    def from_outcomes(cls, triggered: Iterable[int], outcomes: np.ndarray) -> "Observation":
        arms = tuple(sorted(int(i) for i in triggered))
        return cls(arms, tuple(float(outcomes[i]) for i in arms))

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return zip(self.arms, self.outcomes)

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(self)


@dataclass(frozen=True)
class Round:
    """Everything that happened in one simulated round."""

    selected: SuperArm
    outcomes: np.ndarray
    triggered: frozenset
    reward: float
    observation: Observation


class ProblemInstance(ABC):
    """A CMAB instance with probabilistically triggered arms.

    Subclasses are immutable after construction. All randomness comes from the
    ``rng`` argument of the sampling methods.
    """

    #: Lipschitz constant of ``expected_reward`` in the l1 norm over the triggering set.
    lipschitz: float = 1.0

    @property
    @abstractmethod
    def m(self) -> int: ...

    @property
    @abstractmethod
    def means(self) -> np.ndarray: ...

    @abstractmethod
    def sample_outcomes(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one outcome vector X(t) from D."""

    @abstractmethod
    def trigger(self, super_arm: SuperArm, outcomes: np.ndarray,
                rng: np.random.Generator) -> tuple[frozenset, float]:
        """Return the triggered set S'(t) and the realized reward."""

    @abstractmethod
    def triggering_probs(self, super_arm: SuperArm) -> np.ndarray:
        """Length-m vector of p_i^S under the true means."""

    @abstractmethod
    def expected_reward(self, super_arm: SuperArm, theta) -> float:
        """r(S, theta)."""

    @abstractmethod
    def feasible(self) -> Iterator[SuperArm]:
        """Enumerate the feasible super arms in a fixed (lexicographic) order."""

    @abstractmethod
    def feasible_count(self) -> int: ...

    def check_arm(self, arm) -> int:
        arm = int(arm)
        if not 0 <= arm < self.m:
            raise InvalidArmError(f"arm {arm} outside [0, {self.m})")
        return arm

    def triggering_prob(self, super_arm: SuperArm, arm) -> float:
        return float(self.triggering_probs(super_arm)[self.check_arm(arm)])

    def immediate_arms(self, super_arm: SuperArm) -> frozenset:
        """Arms triggered with certainty whenever ``super_arm`` is played."""
        return frozenset(super_arm.arms)

    def triggering_set(self, super_arm: SuperArm) -> frozenset:
        return frozenset(np.flatnonzero(self.triggering_probs(super_arm) > 0).tolist())

    def play(self, super_arm: SuperArm, rng: np.random.Generator) -> Round:
        """Run one round of the environment side of the protocol for ``super_arm``."""
        x = self.sample_outcomes(rng)
        triggered, reward = self.trigger(super_arm, x, rng)
        return Round(super_arm, x, triggered, reward, Observation.from_outcomes(triggered, x))


def project(theta, subset: Iterable[int]) -> dict[int, float]:
    """Restrict a parameter vector to ``subset``, keyed by arm id."""
    theta = np.asarray(theta, dtype=float)
    out = {}
    for i in subset:
        i = int(i)
        if not 0 <= i < theta.size:
            raise InvalidArmError(f"arm {i} outside [0, {theta.size})")
        out[i] = float(theta[i])
    return out


def l1_distance(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    return sum(abs(a[k] - b[k]) for k in a)


def regret_increment(instance: ProblemInstance, optimal_value: float, selected: SuperArm) -> float:
    """Suboptimality gap of ``selected`` given the optimal expected reward."""
    return optimal_value - instance.expected_reward(selected, instance.means)
