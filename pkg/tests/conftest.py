import numpy as np
import pytest

from univlab.characters import character


@pytest.fixture(scope="session")
def chi1():
    return character(1, 0)


@pytest.fixture(scope="session")
def chi4():
    """The nonprincipal character mod 4."""
    return character(4, 1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow", action="store_true", help="skip the multi-minute tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-slow"):
        marker = pytest.mark.skip(reason="--skip-slow")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(marker)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: multi-minute test")
