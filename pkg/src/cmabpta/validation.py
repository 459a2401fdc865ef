"""Monte Carlo audit of an instance's sampler against its analytic quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environments import CascadingInstance
from .model import InstanceTooLargeError, ProblemInstance

AUDIT_CAP = 10 ** 4
SIGMAS = 4.0


@dataclass
class Violation:
    super_arm: tuple
    what: str  # "trigger" or "reward"
    arm: int | None
    empirical: float
    expected: float
    tolerance: float


@dataclass
class AuditReport:
    samples: int
    checks: int = 0
    exact_checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def reward_range(instance: ProblemInstance) -> float:
    if isinstance(instance, CascadingInstance):
        return float(instance.L)
    return float(np.sum(instance.weights))


def audit(instance: ProblemInstance, samples: int, rng: np.random.Generator,
          cap: int = AUDIT_CAP) -> AuditReport:
    """Compare empirical triggering frequencies and mean rewards with
    ``triggering_probs`` and ``expected_reward`` for every feasible super arm.

    Frequencies must fall within 4 binomial standard errors (exactly equal when
    the probability is 0 or 1); mean rewards within ``4 * r_max / (2 sqrt(n))``.
    """
    count = instance.feasible_count()
    if count > cap:
        raise InstanceTooLargeError(f"{count} feasible super arms exceed the audit cap of {cap}")
    report = AuditReport(samples)
    r_tol = SIGMAS * reward_range(instance) / (2 * math.sqrt(samples))
    for S in instance.feasible():
        triggered, rewards = instance.sample_rounds(S, samples, rng)
        freq = triggered.mean(axis=0)
        p = instance.triggering_probs(S)
        for i in np.flatnonzero((p > 0) | (freq > 0)):
            report.checks += 1
            if p[i] in (0.0, 1.0):
                report.exact_checks += 1
                tol = 0.0
            else:
                tol = SIGMAS * math.sqrt(p[i] * (1 - p[i]) / samples)
            if abs(freq[i] - p[i]) > tol:
                report.violations.append(Violation(S.arms, "trigger", int(i), float(freq[i]), float(p[i]), tol))
        report.checks += 1
        expected = instance.expected_reward(S, instance.means)
        if abs(rewards.mean() - expected) > r_tol:
            report.violations.append(Violation(S.arms, "reward", None, float(rewards.mean()), expected, r_tol))
    return report
