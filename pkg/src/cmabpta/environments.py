"""Concrete problem instances: cascading click models and a tabular fixture."""
from __future__ import annotations

import itertools
import json
import math
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .model import (CmabError, InfeasibleArmError, InvalidParameterError,
                    InvalidSuperArmError, ProblemInstance, SuperArm)

DISJUNCTIVE = "disjunctive"
CONJUNCTIVE = "conjunctive"


def bernoulli_outcomes(means: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # one uniform per arm, in arm order; the simulation kernels rely on this layout
    return (rng.random(means.size) < means).astype(float)


def slate_value(factors, mode: str) -> float:
    """Expected reward contributed by one user's slate.

    ``factors`` are the slate's attraction values. The product is taken over the
    sorted values so the result does not depend on slot order, bit for bit.
    """
    prod = 1.0
    if mode == DISJUNCTIVE:
        for f in sorted(1.0 - float(v) for v in factors):
            prod *= f
        return 1.0 - prod
    for f in sorted(float(v) for v in factors):
        prod *= f
    return prod


class CascadingInstance(ProblemInstance):
    """L users, R pages, a K-slot slate per user.

    Base arm ``i * R + j`` is the event that user ``i`` finds page ``j``
    attractive. In the disjunctive model a user clicks the first attractive
    page; in the conjunctive model a user reports the first unattractive one.
    """

    lipschitz = 1.0

    def __init__(self, attraction, K: int, mode: str = DISJUNCTIVE):
        attraction = np.array(attraction, dtype=float, ndmin=2)
        if attraction.ndim != 2:
            raise InvalidParameterError("attraction must be an L x R matrix")
        L, R = attraction.shape
        if not 1 <= K <= R:
            raise InvalidParameterError(f"need 1 <= K <= R, got K={K}, R={R}")
        if np.any(attraction < 0) or np.any(attraction > 1) or np.any(np.isnan(attraction)):
            raise InvalidParameterError("attraction probabilities must lie in [0, 1]")
        if mode not in (DISJUNCTIVE, CONJUNCTIVE):
            raise InvalidParameterError(f"unknown cascade mode {mode!r}")
        attraction.setflags(write=False)
        self.attraction = attraction
        self.L, self.R, self.K = L, R, int(K)
        self.mode = mode
        self._means = attraction.reshape(-1)

    def __repr__(self):
        return f"CascadingInstance(L={self.L}, R={self.R}, K={self.K}, mode={self.mode!r})"

    @property
    def m(self) -> int:
        return self.L * self.R

    @property
    def means(self) -> np.ndarray:
        return self._means

    def arm_id(self, user: int, page: int) -> int:
        return user * self.R + page

    def make_super_arm(self, slates) -> SuperArm:
        """Build a super arm from an ``L x K`` table of page indices."""
        slates = np.asarray(slates, dtype=int).reshape(self.L, self.K)
        return SuperArm(tuple(int(i * self.R + j) for i in range(self.L) for j in slates[i]))

    def slates(self, super_arm: SuperArm) -> np.ndarray:
        """``L x K`` page indices of ``super_arm``; validates its structure."""
        arms = np.asarray(super_arm.arms, dtype=int)
        if arms.size != self.L * self.K:
            raise InvalidSuperArmError(f"expected {self.L * self.K} arms, got {arms.size}")
        arms = arms.reshape(self.L, self.K)
        users, pages = np.divmod(arms, self.R)
        if np.any(arms < 0) or np.any(users != np.arange(self.L)[:, None]):
            raise InvalidSuperArmError("each slate must hold pages of its own user")
        return pages

    def immediate_arms(self, super_arm):
        # only the top slot of each slate is examined unconditionally
        pages = self.slates(super_arm)
        return frozenset(i * self.R + int(pages[i, 0]) for i in range(self.L))

    def sample_outcomes(self, rng):
        return bernoulli_outcomes(self._means, rng)

    def trigger(self, super_arm, outcomes, rng=None):
        pages = self.slates(super_arm)
        stop_on = 1.0 if self.mode == DISJUNCTIVE else 0.0
        triggered = []
        reward = 0.0
        for i in range(self.L):
            stopped = False
            for j in pages[i]:
                arm = i * self.R + int(j)
                triggered.append(arm)
                if outcomes[arm] == stop_on:
                    stopped = True
                    break
            # disjunctive: a click ends the scan; conjunctive: success means no stop
            if stopped == (self.mode == DISJUNCTIVE):
                reward += 1.0
        return frozenset(triggered), reward

    def triggering_probs(self, super_arm):
        pages = self.slates(super_arm)
        p = np.zeros(self.m)
        for i in range(self.L):
            reach = 1.0
            for j in pages[i]:
                p[i * self.R + j] = reach
                q = self.attraction[i, j]
                reach *= (1.0 - q) if self.mode == DISJUNCTIVE else q
        return p

    def expected_reward(self, super_arm, theta):
        theta = np.asarray(theta, dtype=float).reshape(self.L, self.R)
        pages = self.slates(super_arm)
        total = 0.0
        for i in range(self.L):
            total += slate_value(theta[i, pages[i]], self.mode)
        return total

    def feasible(self) -> Iterator[SuperArm]:
        per_user = [
            [tuple(i * self.R + j for j in perm) for perm in itertools.permutations(range(self.R), self.K)]
            for i in range(self.L)
        ]
        for combo in itertools.product(*per_user):
            yield SuperArm(tuple(itertools.chain.from_iterable(combo)))

    def feasible_count(self) -> int:
        return math.perm(self.R, self.K) ** self.L

    def sample_rounds(self, super_arm: SuperArm, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized simulation of ``n`` independent rounds of a fixed super arm.

        Returns an ``n x m`` boolean triggered mask and the ``n`` realized rewards.
        """
        pages = self.slates(super_arm)
        x = rng.random((n, self.m)) < self._means
        triggered = np.zeros((n, self.m), dtype=bool)
        rewards = np.zeros(n)
        for i in range(self.L):
            cols = i * self.R + pages[i]
            xs = x[:, cols]
            cont = ~xs if self.mode == DISJUNCTIVE else xs
            # slot k is reached iff every earlier slot let the scan continue
            reached = np.ones_like(xs)
            reached[:, 1:] = np.cumprod(cont[:, :-1], axis=1)
            triggered[:, cols] = reached
            if self.mode == DISJUNCTIVE:
                rewards += xs.any(axis=1)
            else:
                rewards += xs.all(axis=1)
        return triggered, rewards

    def to_dict(self) -> dict:
        return {"type": "cascading", "mode": self.mode, "L": self.L, "R": self.R, "K": self.K,
                "attraction": self.attraction.tolist()}


def make_blb(R: int, K: int, p: float, delta: float) -> CascadingInstance:
    """Single-user disjunctive instance: K pages at ``p``, the rest at ``p - delta``."""
    if not 0 < p <= 1:
        raise InvalidParameterError(f"need 0 < p <= 1, got p={p}")
    if not 0 < delta < p:
        raise InvalidParameterError(f"need 0 < delta < p, got delta={delta}, p={p}")
    if not 1 <= K <= R:
        raise InvalidParameterError(f"need 1 <= K <= R, got K={K}, R={R}")
    row = np.full(R, p - delta)
    row[:K] = p
    inst = CascadingInstance(row[None, :], K, DISJUNCTIVE)
    inst.spec = {"type": "blb", "R": R, "K": K, "p": p, "delta": delta}
    return inst


def make_uniform_random(L: int, R: int, K: int, rng) -> CascadingInstance:
    """Disjunctive instance with i.i.d. Uniform[0, 1] attractions.

    ``rng`` may be a Generator or an integer seed.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = np.random.Generator(np.random.Philox(int(seed))) if seed is not None else rng
    inst = CascadingInstance(gen.random((L, R)), K, DISJUNCTIVE)
    if seed is not None:
        inst.spec = {"type": "uniform", "L": L, "R": R, "K": K, "seed": int(seed)}
    return inst


def make_conjunctive_needle(R: int, K: int, bad_page: int = 0, bad_value: float = 1 / 3) -> CascadingInstance:
    """Single-user conjunctive instance: every page certainly attractive but one."""
    row = np.ones(R)
    row[bad_page] = bad_value
    inst = CascadingInstance(row[None, :], K, CONJUNCTIVE)
    inst.spec = {"type": "needle", "R": R, "K": K, "bad_page": bad_page, "bad_value": bad_value}
    return inst


class TabularInstance(ProblemInstance):
    """Explicit small instance: listed super arms and a triggering-probability table.

    Arms outside ``S`` are triggered independently of each other and of the
    outcomes, each with its tabulated probability. The reward is linear:
    ``sum(w_i * X_i for i in S')``.
    """

    def __init__(self, means, feasible: Sequence[Sequence[int]], trigger_table, weights=None):
        means = np.array(means, dtype=float)
        if np.any(means < 0) or np.any(means > 1):
            raise InvalidParameterError("means must lie in [0, 1]")
        m = means.size
        feasible = [SuperArm(tuple(s)) for s in feasible]
        if not feasible:
            raise InvalidParameterError("need at least one feasible super arm")
        table = np.array(trigger_table, dtype=float).reshape(len(feasible), m)
        if np.any(table < 0) or np.any(table > 1):
            raise InvalidParameterError("triggering probabilities must lie in [0, 1]")
        for k, s in enumerate(feasible):
            for i in s:
                if not 0 <= i < m:
                    raise InvalidParameterError(f"arm {i} outside [0, {m})")
                if table[k, i] != 1.0:
                    raise InvalidParameterError(f"arm {i} of super arm {s.arms} must trigger with probability 1")
        weights = np.ones(m) if weights is None else np.array(weights, dtype=float)
        if weights.shape != (m,) or np.any(weights < 0):
            raise InvalidParameterError("weights must be a nonnegative length-m vector")
        for a in (means, table, weights):
            a.setflags(write=False)
        self._means = means
        self._feasible = feasible
        self._index = {s.arms: k for k, s in enumerate(feasible)}
        self.table = table
        self.weights = weights
        self.lipschitz = float(max(weights.max(), 1e-12))

    def __repr__(self):
        return f"TabularInstance(m={self.m}, |I|={len(self._feasible)})"

    @property
    def m(self):
        return self._means.size

    @property
    def means(self):
        return self._means

    def _row(self, super_arm: SuperArm) -> np.ndarray:
        try:
            return self.table[self._index[tuple(super_arm.arms)]]
        except KeyError:
            raise InfeasibleArmError(f"super arm {super_arm.arms} is not feasible") from None

    def sample_outcomes(self, rng):
        return bernoulli_outcomes(self._means, rng)

    def trigger(self, super_arm, outcomes, rng):
        p = self._row(super_arm)
        u = rng.random(self.m)
        triggered = np.flatnonzero(u < p)
        # arms of S have p = 1 > u, so they are always included
        reward = float(sum(self.weights[i] * outcomes[i] for i in triggered))
        return frozenset(triggered.tolist()), reward

    def triggering_probs(self, super_arm):
        return self._row(super_arm).copy()

    def expected_reward(self, super_arm, theta):
        theta = np.asarray(theta, dtype=float)
        p = self._row(super_arm)
        return float(np.dot(self.weights * p, theta))

    def feasible(self):
        return iter(sorted(self._feasible, key=lambda s: s.arms))

    def feasible_count(self):
        return len(self._feasible)

    def sample_rounds(self, super_arm, n, rng):
        p = self._row(super_arm)
        x = rng.random((n, self.m)) < self._means
        triggered = rng.random((n, self.m)) < p
        rewards = (triggered & x) @ self.weights
        return triggered, rewards

    def to_dict(self) -> dict:
        return {"type": "tabular", "means": self._means.tolist(),
                "feasible": [list(s.arms) for s in self._feasible],
                "trigger": self.table.tolist(), "weights": self.weights.tolist()}


class InstanceSpecError(CmabError):
    pass


def instance_from_dict(doc: dict) -> ProblemInstance:
    """Build an instance from its JSON-style description."""
    try:
        kind = doc["type"]
        if kind == "cascading":
            attraction = np.array(doc["attraction"], dtype=float)
            if attraction.shape != (doc["L"], doc["R"]):
                raise InstanceSpecError(
                    f"attraction has shape {attraction.shape}, expected ({doc['L']}, {doc['R']})")
            return CascadingInstance(attraction, doc["K"], doc.get("mode", DISJUNCTIVE))
        if kind == "blb":
            return make_blb(doc["R"], doc["K"], doc["p"], doc["delta"])
        if kind == "uniform":
            return make_uniform_random(doc["L"], doc["R"], doc["K"], int(doc.get("seed", 0)))
        if kind == "needle":
            return make_conjunctive_needle(doc["R"], doc["K"], doc.get("bad_page", 0),
                                           doc.get("bad_value", 1 / 3))
        if kind == "tabular":
            return TabularInstance(doc["means"], doc["feasible"], doc["trigger"], doc.get("weights"))
    except KeyError as exc:
        raise InstanceSpecError(f"instance description missing field {exc.args[0]!r}") from None
    raise InstanceSpecError(f"unknown instance type {kind!r}")


def instance_to_dict(instance: ProblemInstance) -> dict:
    spec = getattr(instance, "spec", None)
    return dict(spec) if spec is not None else instance.to_dict()


def load_instance(path) -> ProblemInstance:
    """Read an instance description from a JSON file.

    Accepts either a bare instance object or an experiment config holding one
    under ``"instance"``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceSpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "instance" in doc:
        doc = doc["instance"]
    if not isinstance(doc, dict):
        raise InstanceSpecError(f"{path}: expected a JSON object")
    return instance_from_dict(doc)
