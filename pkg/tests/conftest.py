import functools

import pytest

from dhtransfer.fixtures import dugger_shipley, qt_example
from dhtransfer.transfer import minimal_model


@functools.lru_cache(maxsize=None)
def ds(p=3, spec=None, window=None):
    return dugger_shipley(p, spec=spec, window=window)


@functools.lru_cache(maxsize=None)
def ds_transfer(p=3, r_max=4, i_max=3):
    fx = ds(p)
    return minimal_model(fx.tilde, fx.contraction, r_max, i_max)


@functools.lru_cache(maxsize=None)
def qt(flavor):
    return qt_example(flavor)


@pytest.fixture(scope="session")
def ds3():
    return ds(3)


@pytest.fixture(scope="session")
def ds3_transfer():
    return ds_transfer(3)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
