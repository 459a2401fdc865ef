"""Seed derivation for reproducible, order-independent replications.

Replication ``k`` of an experiment with master seed ``s`` gets the 64-bit seed

    SeedSequence(entropy=s, spawn_key=(k,)).generate_state(1, uint64)[0]

and from it two independent Philox (counter-based) streams:

    environment: Philox(SeedSequence(seed, spawn_key=(0,)))
    learner:     Philox(SeedSequence(seed, spawn_key=(1,)))

The environment stream only draws outcome vectors, so every learner sees the
same outcome sequence for a given replication seed.
"""
import numpy as np

from .model import InvalidParameterError

RNG_NAME = "numpy.random.Philox"
SEED_DERIVATION = "SeedSequence(master_seed, spawn_key=(replication,)) -> uint64; streams spawn_key=(0,)=env, (1,)=learner"


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def replication_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=check_seed(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    env = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0,))))
    learner = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1,))))
    return env, learner
