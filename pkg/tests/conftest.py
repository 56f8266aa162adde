""" SPDX-License-Identifier: MIT-0 """

import pytest


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False, help="run multi-minute reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: multi-minute reproduction, skipped unless --long is given")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip_long = pytest.mark.skip(reason="needs --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)
