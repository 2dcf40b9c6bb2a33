import functools

import pytest

from painleve_ivp.ode_core import InitialData, IntegratorOptions, integrate

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_trajectory(a, b, t_end, max_poles=200000, **opts):
    return integrate(InitialData(a, b), t_end, IntegratorOptions(max_poles=max_poles, **opts))


@pytest.fixture(scope="session")
def trajectory():
    return cached_trajectory


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
