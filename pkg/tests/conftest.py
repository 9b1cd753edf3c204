"""
Shared pytest configuration for annealbench.

Acceptance-scale runs are marked ``slow`` and only collected with --runslow.
"""

import pytest

from annealbench.integrators import IntegratorConfig
from annealbench.model import ModelParams


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance test (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tight():
    """Integrator settings for comparisons at the 1e-8 level."""
    return IntegratorConfig(rtol=1e-11, atol=1e-13)


@pytest.fixture
def p2_small():
    return ModelParams(p=2, J=1.0, N=16)


@pytest.fixture
def p3_small():
    return ModelParams(p=3, J=1.0, N=12)
