import math

import numpy as np
import pytest

from cmabpta import (CascadingInstance, InvalidArmError, InvalidSuperArmError, Observation, SuperArm,
                     make_uniform_random, project, regret_increment)
from cmabpta.environments import CONJUNCTIVE
from cmabpta.model import l1_distance


def test_project_restricts():
    assert project([0.2, 0.5, 0.9], {0, 2}) == {0: 0.2, 2: 0.9}


def test_project_empty():
    assert project([0.2, 0.5], set()) == {}


def test_project_identity():
    assert project([0.2, 0.5, 0.9], {0, 1, 2}) == {0: 0.2, 1: 0.5, 2: 0.9}


def test_project_rejects_bad_arm():
    with pytest.raises(InvalidArmError):
        project([0.2, 0.5], {2})


def test_super_arm_rejects_duplicates():
    with pytest.raises(InvalidSuperArmError):
        SuperArm((1, 2, 1))


def test_regret_increment_optimal_is_zero(blb16):
    assert regret_increment(blb16, 1 - 0.8 ** 2, SuperArm((0, 1))) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("arms, gap", [((1, 3), 0.36 - (1 - 0.8 * 0.95)), ((3, 4), 0.36 - (1 - 0.95 ** 2))])
def test_regret_increment_blb(blb16, arms, gap):
    assert regret_increment(blb16, 0.36, SuperArm(arms)) == pytest.approx(gap, abs=1e-12)


def test_regret_increment_values():
    assert 0.36 - (1 - 0.8 * 0.95) == pytest.approx(0.12)
    assert 0.36 - (1 - 0.95 ** 2) == pytest.approx(0.2625)


def _instances():
    rng = np.random.Generator(np.random.Philox(3))
    att = rng.random((2, 5))
    att[0, 1] = 1.0
    att[1, 3] = 0.0
    return [make_uniform_random(2, 5, 3, 1), CascadingInstance(att, 3, CONJUNCTIVE),
            CascadingInstance(att, 2), make_uniform_random(1, 6, 4, 9)]


@pytest.mark.parametrize("inst", _instances(), ids=repr)
def test_triggered_between_selected_and_triggering_set(inst, rng):
    arms = list(inst.feasible())
    for k in range(2000):
        S = arms[rng.integers(len(arms))]
        rnd = inst.play(S, rng)
        assert inst.immediate_arms(S) <= rnd.triggered <= inst.triggering_set(S)
        assert rnd.triggered <= set(S)
        # semi-bandit feedback: exactly the triggered arms, with their outcomes
        assert set(rnd.observation.arms) == rnd.triggered
        for i, x in rnd.observation:
            assert x == rnd.outcomes[i]


def test_tabular_triggered_between(tabular, rng):
    for S in tabular.feasible():
        for _ in range(500):
            rnd = tabular.play(S, rng)
            assert set(S) == tabular.immediate_arms(S)
            assert set(S) <= rnd.triggered <= tabular.triggering_set(S)


@pytest.mark.parametrize("inst", _instances()[:2], ids=repr)
def test_mean_reward_converges(inst, rng):
    n = 100_000
    S = next(iter(inst.feasible()))
    rewards = np.array([inst.play(S, rng).reward for _ in range(n)])
    assert abs(rewards.mean() - inst.expected_reward(S, inst.means)) <= 4 * math.sqrt(inst.L ** 2 / n)


def _lipschitz_violations(inst, rng, pairs=1000):
    arms = list(inst.feasible())
    bad = 0
    for _ in range(pairs):
        S = arms[rng.integers(len(arms))]
        th, th2 = rng.random(inst.m), rng.random(inst.m)
        tilde = inst.triggering_set(S)
        lhs = abs(inst.expected_reward(S, th) - inst.expected_reward(S, th2))
        bad += lhs > inst.lipschitz * l1_distance(project(th, tilde), project(th2, tilde)) + 1e-12
    return bad


def _interior_instances():
    att = np.random.Generator(np.random.Philox(4)).random((2, 5))
    return [make_uniform_random(2, 5, 3, 1), make_uniform_random(1, 6, 4, 9),
            CascadingInstance(att, 3, CONJUNCTIVE)]


@pytest.mark.parametrize("inst", _interior_instances(), ids=repr)
def test_lipschitz_audit(inst, rng):
    assert _lipschitz_violations(inst, rng) == 0


def test_lipschitz_needs_interior_attractions(rng):
    # a certain click in slot 1 hides slot 2 from the triggering set, yet
    # r(S, theta) still depends on theta at slot 2
    inst = CascadingInstance([[1.0, 0.5, 0.5]], 2)
    assert inst.triggering_set(SuperArm((0, 1))) == {0}
    assert _lipschitz_violations(inst, rng) > 0


def test_observation_entries():
    obs = Observation.from_outcomes({2, 0}, np.array([1.0, 0.0, 0.5]))
    assert obs.entries == [(0, 1.0), (2, 0.5)]
