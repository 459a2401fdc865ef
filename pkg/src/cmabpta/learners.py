"""CTS (Beta-posterior Thompson sampling) and CUCB learners.

Both learners work against any exact oracle and consume semi-bandit
:class:`~cmabpta.model.Observation` feedback.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Observation, SuperArm

#: CUCB confidence radius is sqrt(CUCB_EXPLORATION * ln t / N_i).
CUCB_EXPLORATION = 1.5


@dataclass
class CtsState:
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def initial(cls, m: int) -> "CtsState":
        return cls(np.ones(m, dtype=np.int64), np.ones(m, dtype=np.int64))

    @property
    def pulls(self) -> np.ndarray:
        return self.a + self.b - 2

    def posterior_mean(self) -> np.ndarray:
        return self.a / (self.a + self.b)


@dataclass
class CucbState:
    n: np.ndarray
    mean: np.ndarray
    t: int = 1

    @classmethod
    def initial(cls, m: int) -> "CucbState":
        return cls(np.zeros(m, dtype=np.int64), np.zeros(m), 1)


@dataclass(frozen=True)
class RoundSample:
    theta: np.ndarray
    selected: SuperArm


def cts_select(state: CtsState, oracle, rng: np.random.Generator) -> RoundSample:
    # one Beta draw per arm, in arm-index order
    theta = rng.beta(state.a.astype(float), state.b.astype(float))
    return RoundSample(theta, oracle(theta).super_arm)


def bernoulli_round(x: float, rng: np.random.Generator) -> int:
    """Y ~ Bernoulli(x); binary outcomes pass through without touching ``rng``."""
    if x == 1.0:
        return 1
    if x == 0.0:
        return 0
    return int(rng.random() < x)


def cts_update(state: CtsState, observation: Observation, rng: np.random.Generator) -> CtsState:
    """Posterior update for the triggered arms, in place; returns ``state``."""
    for i, x in observation:
        y = bernoulli_round(x, rng)
        state.a[i] += y
        state.b[i] += 1 - y
    return state


def cucb_index(state: CucbState, exploration: float = CUCB_EXPLORATION) -> np.ndarray:
    log_t = math.log(state.t)
    idx = np.ones(state.n.size)
    tried = state.n > 0
    idx[tried] = np.minimum(1.0, state.mean[tried] + np.sqrt(exploration * log_t / state.n[tried]))
    return idx


def cucb_select(state: CucbState, oracle, exploration: float = CUCB_EXPLORATION) -> SuperArm:
    return oracle(cucb_index(state, exploration)).super_arm


def cucb_update(state: CucbState, observation: Observation) -> CucbState:
    for i, x in observation:
        state.n[i] += 1
        state.mean[i] += (x - state.mean[i]) / state.n[i]
    state.t += 1
    return state


class CTS:
    """Combinatorial Thompson sampling with Bernoulli-rounded Beta posteriors."""

    name = "cts"

    def __init__(self, m: int, oracle, rng: np.random.Generator):
        self.state = CtsState.initial(m)
        self.oracle = oracle
        self.rng = rng
        self.last_theta = None

    def select(self) -> SuperArm:
        sample = cts_select(self.state, self.oracle, self.rng)
        self.last_theta = sample.theta
        return sample.selected

    def update(self, observation: Observation):
        cts_update(self.state, observation, self.rng)


class CUCB:
    """Combinatorial UCB with clipped confidence indices."""

    name = "cucb"

    def __init__(self, m: int, oracle, exploration: float = CUCB_EXPLORATION):
        self.state = CucbState.initial(m)
        self.oracle = oracle
        self.exploration = exploration

    def select(self) -> SuperArm:
        return cucb_select(self.state, self.oracle, self.exploration)

    def update(self, observation: Observation):
        cucb_update(self.state, observation)
