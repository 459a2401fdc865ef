"""Compiled simulation loop for cascading instances.

Consumes random numbers in exactly the same order as the pure-numpy path in
:mod:`cmabpta.harness`, so both produce bit-identical trajectories.
"""
import math

import numba
import numpy as np

CTS = 0
CUCB = 1

# above this slate length a full stable sort beats repeated selection
_SELECT_MAX_K = 8


@numba.njit(cache=True, nogil=True)
def _top_k(theta, start, R, K, out):
    if K <= _SELECT_MAX_K:
        for k in range(K):
            best = -1
            for j in range(R):
                taken = False
                for q in range(k):
                    if out[q] == j:
                        taken = True
                        break
                if taken:
                    continue
                if best < 0 or theta[start + j] > theta[start + best]:
                    best = j
            out[k] = best
    else:
        order = np.argsort(-theta[start:start + R], kind="mergesort")
        for k in range(K):
            out[k] = order[k]


@numba.njit(cache=True, nogil=True)
def _slate_value(means, start, slate, K, disjunctive):
    f = np.empty(K)
    for k in range(K):
        v = means[start + slate[k]]
        f[k] = 1.0 - v if disjunctive else v
    f.sort()
    prod = 1.0
    for k in range(K):
        prod *= f[k]
    return 1.0 - prod if disjunctive else prod


@numba.njit(cache=True, nogil=True)
def run_cascading(means, L, R, K, disjunctive, learner, exploration, T, record_every,
                  opt_value, env_rng, learner_rng):
    """Return (cumulative pseudo-regret at recorded rounds, final counters).

    Counters are (a, b) for CTS and (n, mean) for CUCB.
    """
    m = L * R
    n_rec = (T + record_every - 1) // record_every
    out = np.empty(n_rec)
    a = np.ones(m, dtype=np.int64)
    b = np.ones(m, dtype=np.int64)
    n = np.zeros(m, dtype=np.int64)
    mean = np.zeros(m)
    theta = np.empty(m)
    slates = np.empty((L, K), dtype=np.int64)
    cum = 0.0
    rec = 0
    for t in range(1, T + 1):
        if learner == CTS:
            for i in range(m):
                theta[i] = learner_rng.beta(float(a[i]), float(b[i]))
        else:
            lt = math.log(t)
            for i in range(m):
                if n[i] == 0:
                    theta[i] = 1.0
                else:
                    theta[i] = min(1.0, mean[i] + math.sqrt(exploration * lt / n[i]))
        for u in range(L):
            _top_k(theta, u * R, R, K, slates[u])

        x = env_rng.random(m)
        reward_mu = 0.0
        for u in range(L):
            base = u * R
            for k in range(K):
                arm = base + slates[u, k]
                xi = 1.0 if x[arm] < means[arm] else 0.0
                if learner == CTS:
                    # binary outcomes: Bernoulli rounding is the identity
                    if xi == 1.0:
                        a[arm] += 1
                    else:
                        b[arm] += 1
                else:
                    n[arm] += 1
                    mean[arm] += (xi - mean[arm]) / n[arm]
                if disjunctive:
                    if xi == 1.0:
                        break
                elif xi == 0.0:
                    break
            reward_mu += _slate_value(means, base, slates[u], K, disjunctive)

        cum += opt_value - reward_mu
        if t % record_every == 0 or t == T:
            out[rec] = cum
            rec += 1
    if learner == CTS:
        return out, a.astype(np.float64), b.astype(np.float64)
    return out, n.astype(np.float64), mean
