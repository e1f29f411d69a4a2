"""
Shared pytest options.

Tests marked `sweep` run the long randomised sweeps and are skipped
unless pytest is started with --sweeps.
"""

import pytest


def pytest_addoption(parser):
    parser.addoption("--sweeps", action="store_true", default=False, help="run the long randomised sweeps")


def pytest_configure(config):
    config.addinivalue_line("markers", "sweep: long randomised sweep, enabled with --sweeps")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--sweeps"):
        return
    skip = pytest.mark.skip(reason="needs --sweeps")
    for item in items:
        if "sweep" in item.keywords:
            item.add_marker(skip)
