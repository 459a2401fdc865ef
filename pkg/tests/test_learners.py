import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmabpta import CTS, CUCB, Observation, make_blb, make_uniform_random
from cmabpta.learners import (CtsState, CucbState, cts_select, cts_update, cucb_index, cucb_select,
                              cucb_update)
from cmabpta.oracles import exact_oracle


def identity_oracle(theta):
    class R:
        super_arm = tuple(np.argsort(-theta, kind="stable")[:1])
    return R


class TestCtsSelect:
    def test_uniform_prior(self, rng):
        state = CtsState.initial(4)
        draws = np.array([cts_select(state, identity_oracle, rng).theta for _ in range(20_000)])
        # Beta(1,1) moments: mean 1/2, variance 1/12
        assert abs(draws.mean() - 0.5) < 4 * math.sqrt(1 / 12 / draws.size)
        assert draws.var() == pytest.approx(1 / 12, rel=0.03)

    def test_concentrated_posterior(self, rng):
        state = CtsState(np.array([10 ** 6]), np.array([1]))
        draws = np.array([cts_select(state, identity_oracle, rng).theta[0] for _ in range(100_000)])
        # Beta(a, 1) has CDF x^a, so P(theta <= 0.99) = 0.99^(10^6)
        assert 0.99 ** 10 ** 6 < 1e-3
        assert np.mean(draws > 0.99) >= 0.999

    def test_replay(self):
        state = CtsState(np.array([3, 1, 7]), np.array([2, 5, 1]))
        oracle = exact_oracle(make_blb(3, 1, 0.5, 0.1))
        g = lambda: np.random.Generator(np.random.Philox(9))
        a, b = cts_select(state, oracle, g()), cts_select(state, oracle, g())
        assert np.array_equal(a.theta, b.theta) and a.selected == b.selected

    def test_state_untouched(self, rng):
        state = CtsState(np.array([3, 1]), np.array([2, 5]))
        cts_select(state, identity_oracle, rng)
        assert state.a.tolist() == [3, 1] and state.b.tolist() == [2, 5]


class TestCtsUpdate:
    def test_success(self, rng):
        state = cts_update(CtsState.initial(2), Observation((0,), (1.0,)), rng)
        assert state.a.tolist() == [2, 1] and state.b.tolist() == [1, 1]

    def test_failure(self, rng):
        state = cts_update(CtsState.initial(2), Observation((0,), (0.0,)), rng)
        assert state.a.tolist() == [1, 1] and state.b.tolist() == [2, 1]

    def test_fractional_outcome(self, rng):
        state = CtsState.initial(1)
        for _ in range(10_000):
            cts_update(state, Observation((0,), (0.5,)), rng)
        assert abs((state.a[0] - 1) - 5000) <= 4 * 50
        assert state.a[0] + state.b[0] - 2 == 10_000

    def test_certain_arm_grows_by_one(self, rng):
        state = CtsState.initial(3)
        for t in range(1, 50):
            cts_update(state, Observation((1,), (1.0,)), rng)
            assert state.a[1] == t + 1
            assert 0 < state.posterior_mean()[1] < 1


class TestCucb:
    def test_untried(self):
        assert cucb_index(CucbState.initial(3)).tolist() == [1.0, 1.0, 1.0]

    def test_clipped(self):
        state = CucbState(np.array([8]), np.array([0.5]), t=math.exp(6))
        # 0.5 + sqrt(1.5 * 6 / 8) = 1.5607 > 1
        assert 0.5 + math.sqrt(18 / 16) == pytest.approx(1.5607, abs=1e-4)
        assert cucb_index(state)[0] == 1.0

    def test_value(self):
        state = CucbState(np.array([200]), np.array([0.2]), t=1600)
        assert cucb_index(state)[0] == pytest.approx(0.2 + math.sqrt(3 * math.log(1600) / 400))
        assert cucb_index(state)[0] == pytest.approx(0.435, abs=1e-3)

    def test_first_update(self):
        state = cucb_update(CucbState.initial(2), Observation((1,), (1.0,)))
        assert state.mean[1] == 1.0 and state.n[1] == 1 and state.t == 2

    def test_running_mean(self):
        state = CucbState.initial(1)
        cucb_update(state, Observation((0,), (1.0,)))
        cucb_update(state, Observation((0,), (0.0,)))
        assert state.mean[0] == 0.5

    def test_round_counter_ignores_observation_size(self):
        state = CucbState.initial(3)
        cucb_update(state, Observation((), ()))
        cucb_update(state, Observation((0, 1, 2), (1.0, 1.0, 1.0)))
        assert state.t == 3

    def test_bernoulli_mean(self, rng):
        state = CucbState.initial(1)
        for x in rng.random(10_000) < 0.3:
            cucb_update(state, Observation((0,), (float(x),)))
        assert abs(state.mean[0] - 0.3) <= 0.02

    def test_select_uses_oracle(self):
        inst = make_blb(4, 2, 0.2, 0.1)
        state = CucbState(np.array([5, 5, 5, 0]), np.array([0.1, 0.9, 0.2, 0.0]), t=2)
        # arm 3 is untried and arm 1 clips (0.9 + 0.456 > 1): both tie at 1, lower index first
        assert cucb_index(state)[[1, 3]].tolist() == [1.0, 1.0] and cucb_index(state)[[0, 2]].max() < 1
        assert cucb_select(state, exact_oracle(inst)).arms == (1, 3)

    @settings(max_examples=100, deadline=None)
    @given(mean=st.floats(0, 1), n=st.integers(1, 10 ** 6), t=st.integers(1, 10 ** 6))
    def test_monotone(self, mean, n, t):
        idx = lambda n_, t_: cucb_index(CucbState(np.array([n_]), np.array([mean]), t_))[0]
        assert idx(n, t) <= idx(n, t + 1)
        assert idx(n + 1, t) <= idx(n, t)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32), rounds=st.integers(1, 60), learner=st.sampled_from(["cts", "cucb"]))
def test_counter_conservation(seed, rounds, learner):
    inst = make_uniform_random(2, 5, 3, seed % 97)
    rng = np.random.Generator(np.random.Philox(seed))
    oracle = exact_oracle(inst)
    agent = CTS(inst.m, oracle, rng) if learner == "cts" else CUCB(inst.m, oracle)
    seen = np.zeros(inst.m, dtype=int)
    total = 0
    for _ in range(rounds):
        rnd = inst.play(agent.select(), rng)
        agent.update(rnd.observation)
        seen[list(rnd.observation.arms)] += 1
        total += len(rnd.triggered)
    if learner == "cts":
        assert np.array_equal(agent.state.pulls, seen)
        assert agent.state.pulls.sum() == total
    else:
        assert np.array_equal(agent.state.n, seen)
