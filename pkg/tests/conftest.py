import pytest
from hypothesis import settings

from usflab import build_network
from usflab.fixtures import builtin_fixtures

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixtures():
    return builtin_fixtures()


@pytest.fixture
def triangle():
    return build_network(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


@pytest.fixture
def wtriangle():
    # edge 0 = 01 (c=1), edge 1 = 12 (c=2), edge 2 = 20 (c=3)
    return build_network(3, [(0, 1, 1), (1, 2, 2), (2, 0, 3)])


@pytest.fixture
def path4():
    return build_network(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
