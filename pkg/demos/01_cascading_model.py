"""
Cascading bandits as triggering processes
=========================================

A user scans a slate of K pages from the top. In the disjunctive model the
scan stops at the first attractive page; in the conjunctive model it stops at
the first unattractive one. Pages after the stop are never observed.
"""
import numpy as np

from cmabpta import CascadingInstance, SuperArm, cascading_oracle

attraction = np.array([[0.2, 0.7, 0.4, 0.1]])
inst = CascadingInstance(attraction, K=3)
S = SuperArm((1, 2, 0))

# probability that each page gets looked at
print("triggering probabilities:", inst.triggering_probs(S))
print("expected reward:", inst.expected_reward(S, inst.means))

# one simulated round: which pages were observed and was there a click
rng = np.random.Generator(np.random.Philox(0))
rnd = inst.play(S, rng)
print("outcomes", rnd.outcomes, "observed", sorted(rnd.triggered), "reward", rnd.reward)

# the same slate read conjunctively: all three pages must satisfy the user
conj = CascadingInstance(attraction, K=3, mode="conjunctive")
print("conjunctive triggering probabilities:", conj.triggering_probs(S))

# the exact oracle puts the K most attractive pages in decreasing order
best = cascading_oracle(inst, inst.means)
print("best slate", best.super_arm.arms, "value", round(best.value, 4))

# a vectorized check of the closed forms
triggered, rewards = inst.sample_rounds(S, 100_000, rng)
print("empirical", triggered.mean(axis=0).round(3), "mean reward", rewards.mean().round(4))
