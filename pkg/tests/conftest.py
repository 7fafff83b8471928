import pytest

from lrd_quadforms.config import load_settings, use_settings
from lrd_quadforms.rng import RngStream


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte Carlo acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo or quadrature runs")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def default_settings():
    use_settings(load_settings())
    yield
    use_settings(load_settings())


@pytest.fixture
def rng():
    return RngStream(20240917)
