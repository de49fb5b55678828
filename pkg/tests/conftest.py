import numpy as np
import pytest

from graphscatter import bound_states, family_from_string, make_family


def graph(spec):
    return make_family(family_from_string(spec))


@pytest.fixture(scope="session")
def ac4():
    return graph("AC:4")


@pytest.fixture(scope="session")
def c105():
    return graph("C:10:5")


@pytest.fixture(scope="session")
def bridge():
    from graphscatter import build_graph
    return build_graph([(1, 2)], [1, 2], "bridge")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
