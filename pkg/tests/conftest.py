import pytest
from hypothesis import HealthCheck, settings

from smagdamp import make_domain

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit_domain():
    """L = U = 1, Re = 100, C_s delta = 0.01."""
    return make_domain(1.0, 1.0, 0.01, 0.1, 0.1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
