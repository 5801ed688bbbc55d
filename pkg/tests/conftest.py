import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def heat1():
    from levy_spde import GreenOperator
    return GreenOperator("heat", 1)


@pytest.fixture
def wave1():
    from levy_spde import GreenOperator
    return GreenOperator("wave", 1)
