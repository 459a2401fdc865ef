import numpy as np
import pytest

from cmabpta import TabularInstance, make_blb


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def blb16():
    return make_blb(16, 2, 0.2, 0.15)


@pytest.fixture
def blb4():
    return make_blb(4, 2, 0.2, 0.15)


@pytest.fixture
def tabular():
    # three arms; super arms {0} and {1}; arm 2 is only reachable by triggering
    return TabularInstance(
        means=[0.3, 0.6, 0.5],
        feasible=[[0], [1]],
        trigger_table=[[1.0, 0.0, 0.5], [0.0, 1.0, 0.25]],
        weights=[1.0, 1.0, 2.0],
    )
