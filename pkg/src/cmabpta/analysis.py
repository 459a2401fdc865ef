"""Exact instance diagnostics, threshold quantities and the CTS regret bound.

Everything here is computed by exhaustive enumeration of the feasible super
arms, so it is only usable on small instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environments import CascadingInstance
from .model import InvalidArmError, InvalidParameterError, InstanceTooLargeError, ProblemInstance, SuperArm
from .oracles import DEFAULT_CAP, cascading_oracle

EPSILON_MAX = 1.0 / math.sqrt(math.e)


class _Unbounded:
    """Gap marker for arms that no suboptimal triggering set contains."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __float__(self):
        return math.inf

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


@dataclass
class InstanceDiagnostics:
    m: int
    opt_value: float
    opt_set: list
    s_star: SuperArm
    k_star: int
    k_tilde_star: int
    gap_max: float
    gap_per_arm: list  # float, or UNBOUNDED
    p_per_arm: np.ndarray  # nan for arms that can never be triggered
    p_star: float
    K_tilde: int
    # per feasible super arm, in enumeration order
    super_arms: list = field(repr=False, default_factory=list)
    gaps: np.ndarray = field(repr=False, default=None)
    tilde_sets: list = field(repr=False, default_factory=list)
    trigger_probs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._index = {s.arms: k for k, s in enumerate(self.super_arms)}

    def _k(self, super_arm: SuperArm) -> int:
        try:
            return self._index[tuple(super_arm.arms)]
        except KeyError:
            raise InvalidArmError(f"{super_arm.arms} is not a feasible super arm") from None

    def gap(self, super_arm: SuperArm) -> float:
        return float(self.gaps[self._k(super_arm)])

    def tilde_set(self, super_arm: SuperArm) -> frozenset:
        return self.tilde_sets[self._k(super_arm)]

    def is_optimal(self, super_arm: SuperArm) -> bool:
        return self.gaps[self._k(super_arm)] == 0.0

    def suboptimal(self):
        """Indices of the suboptimal super arms."""
        return np.flatnonzero(self.gaps > 0)

    def gap_array(self) -> np.ndarray:
        return np.array([float(g) for g in self.gap_per_arm])

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "opt_value": self.opt_value,
            "opt_set": [list(s.arms) for s in self.opt_set],
            "s_star": list(self.s_star.arms),
            "k_star": self.k_star,
            "k_tilde_star": self.k_tilde_star,
            "gap_max": self.gap_max,
            "gap_per_arm": [None if g is UNBOUNDED else g for g in self.gap_per_arm],
            "p_per_arm": [None if math.isnan(p) else p for p in self.p_per_arm.tolist()],
            "p_star": self.p_star,
            "K_tilde": self.K_tilde,
            "n_super_arms": len(self.super_arms),
        }


def optimal_value(instance: ProblemInstance, cap: int = DEFAULT_CAP) -> float:
    """max over feasible S of r(S, mu)."""
    if isinstance(instance, CascadingInstance):
        return cascading_oracle(instance, instance.means).value
    return diagnose(instance, cap).opt_value


def diagnose(instance: ProblemInstance, cap: int = DEFAULT_CAP) -> InstanceDiagnostics:
    count = instance.feasible_count()
    if count > cap:
        raise InstanceTooLargeError(f"{count} feasible super arms exceed the cap of {cap}")
    mu = instance.means
    arms = list(instance.feasible())
    values = np.array([instance.expected_reward(s, mu) for s in arms])
    probs = np.array([instance.triggering_probs(s) for s in arms])
    tilde = [frozenset(np.flatnonzero(row > 0).tolist()) for row in probs]
    sizes = np.array([len(t) for t in tilde])

    opt_value = float(values.max())
    gaps = opt_value - values
    opt_idx = np.flatnonzero(gaps == 0)
    star = opt_idx[np.argmin(sizes[opt_idx])]

    in_tilde = probs > 0
    sub = gaps > 0
    gap_per_arm = []
    for i in range(instance.m):
        mask = sub & in_tilde[:, i]
        gap_per_arm.append(float(gaps[mask].min()) if mask.any() else UNBOUNDED)
    masked = np.where(in_tilde, probs, np.inf)
    p = masked.min(axis=0)
    p[np.isinf(p)] = np.nan

    return InstanceDiagnostics(
        m=instance.m,
        opt_value=opt_value,
        opt_set=[arms[k] for k in opt_idx],
        s_star=arms[star],
        k_star=len(arms[star]),
        k_tilde_star=int(sizes[star]),
        gap_max=float(gaps.max()),
        gap_per_arm=gap_per_arm,
        p_per_arm=p,
        p_star=float(np.nanmin(p)),
        K_tilde=int(sizes.max()),
        super_arms=arms,
        gaps=gaps,
        tilde_sets=tilde,
        trigger_probs=probs,
    )


def _check_epsilon(epsilon):
    if not 0 < epsilon <= EPSILON_MAX:
        raise InvalidParameterError(f"epsilon must satisfy 0 < epsilon <= 1/sqrt(e), got {epsilon}")


def _check_rho(rho):
    if not 0 < rho < 1:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho}")


def _check_horizon(T):
    if T <= 1:
        raise InvalidParameterError(f"horizon T must exceed 1, got {T}")


def _margin(k_tilde_star, B, epsilon):
    return 2 * B * (k_tilde_star ** 2 + 2) * epsilon


def sampling_threshold_value(gap, tilde_size, k_tilde_star, B, epsilon, T) -> float:
    """2 log T / (gap / (2 B |S~|) - (k~*^2 + 2) eps / |S~|)^2."""
    denom = gap / (2 * B * tilde_size) - (k_tilde_star ** 2 + 2) * epsilon / tilde_size
    return 2 * math.log(T) / denom ** 2


def sampling_threshold(S: SuperArm, diag: InstanceDiagnostics, B: float, epsilon: float, T: int) -> float:
    _check_epsilon(epsilon)
    _check_horizon(T)
    gap = diag.gap(S)
    if not gap > _margin(diag.k_tilde_star, B, epsilon):
        raise InvalidParameterError(
            f"need gap > 2B(k~*^2+2)eps, got gap={gap} <= {_margin(diag.k_tilde_star, B, epsilon)}")
    return sampling_threshold_value(gap, len(diag.tilde_set(S)), diag.k_tilde_star, B, epsilon, T)


def trial_threshold(S: SuperArm, arm: int, diag: InstanceDiagnostics, B: float, epsilon: float,
                    T: int, rho: float) -> float:
    """Sampling threshold inflated by 1 / ((1 - rho) p_i)."""
    _check_rho(rho)
    if arm not in diag.tilde_set(S):
        raise InvalidArmError(f"arm {arm} is not in the triggering set of {S.arms}")
    return sampling_threshold(S, diag, B, epsilon, T) / ((1 - rho) * diag.p_per_arm[arm])


def max_trial_threshold(arm: int, diag: InstanceDiagnostics, B, epsilon, T, rho):
    """Largest trial threshold of ``arm`` over suboptimal super arms; None if there are none."""
    best = None
    for k in diag.suboptimal():
        S = diag.super_arms[k]
        if arm in diag.tilde_sets[k]:
            v = trial_threshold(S, arm, diag, B, epsilon, T, rho)
            best = v if best is None else max(best, v)
    return best


@dataclass(frozen=True)
class RegretBound:
    log_term: float
    exploration_term: float
    constant_term: float
    params: dict

    @property
    def total(self) -> float:
        return self.log_term + self.exploration_term + self.constant_term

    def to_dict(self) -> dict:
        return {
            "log_term": self.log_term,
            "exploration_term": self.exploration_term,
            "constant_term": self.constant_term,
            "total": self.total,
            "params": self.params,
            "notes": ["constant_term scales with the unspecified problem-independent constant alpha",
                      "the log term equals the 4B*sqrt(2 log T L_i^max / ((1-rho) p_i)) form exactly",
                      "log is the natural logarithm"],
        }


def theorem1_bound(diag: InstanceDiagnostics, B: float, epsilon: float, rho: float,
                   alpha: float = 1.0, T: int = 100_000) -> RegretBound:
    """Gap-dependent upper bound on the expected regret of CTS by round ``T``.

    Returns the log T term, the finite exploration term and the
    (constant-order) term scaled by ``alpha`` separately.
    """
    _check_epsilon(epsilon)
    _check_rho(rho)
    _check_horizon(T)
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    margin = _margin(diag.k_tilde_star, B, epsilon)
    sub = diag.suboptimal()
    if sub.size and not diag.gaps[sub].min() > margin:
        raise InvalidParameterError(
            f"need every suboptimal gap > 2B(k~*^2+2)eps = {margin}, smallest gap is {diag.gaps[sub].min()}")

    log_T = math.log(T)
    log_term = 0.0
    for i in range(diag.m):
        worst = 0.0
        for k in sub:
            if i in diag.tilde_sets[k]:
                size = len(diag.tilde_sets[k])
                worst = max(worst, 16 * B ** 2 * size * log_T
                            / ((1 - rho) * diag.p_per_arm[i] * (diag.gaps[k] - margin)))
        log_term += worst

    p_star, kt = diag.p_star, diag.k_tilde_star
    indicator = 1.0 if p_star < 1 else 0.0
    exploration_term = (3 + diag.K_tilde ** 2 / ((1 - rho) * p_star * epsilon ** 2)
                        + 2 * indicator / (rho ** 2 * p_star)) * diag.m * diag.gap_max
    constant_term = (alpha * 8 * kt / (p_star * epsilon ** 2) * (4 / epsilon ** 2 + 1) ** kt
                     * math.log(kt / epsilon ** 2) * diag.gap_max)
    params = {"B": B, "epsilon": epsilon, "rho": rho, "alpha": alpha, "T": T}
    return RegretBound(log_term, exploration_term, constant_term, params)
