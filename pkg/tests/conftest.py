import numpy as np
import pytest

from sdrisk.measures import ReturnSeries


@pytest.fixture(scope="session")
def acceptance_lines(request):
    lines: list[str] = []
    request.config._acceptance_lines = lines
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def normal_million() -> ReturnSeries:
    rng = np.random.default_rng(20240819)
    return ReturnSeries(rng.standard_normal(10**6))


@pytest.fixture(scope="session")
def t6_million() -> ReturnSeries:
    # unit-variance Student draws, same scale convention as the simulator
    rng = np.random.default_rng(911)
    return ReturnSeries(rng.standard_t(6, 10**6) * np.sqrt(4.0 / 6.0))


@pytest.fixture()
def small_sample() -> ReturnSeries:
    rng = np.random.default_rng(42)
    return ReturnSeries(rng.standard_normal(400))
