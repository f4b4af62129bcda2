import numpy as np
import pytest

from uavcover import Area, ChannelParams, LinkBudget


@pytest.fixture(scope="session")
def link():
    return LinkBudget()


@pytest.fixture(scope="session")
def params():
    return ChannelParams()


@pytest.fixture(scope="session")
def area():
    return Area()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
