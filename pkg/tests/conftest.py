import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kintrends.generative import generate_survey, synthetic_cities

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_params():
    return synthetic_cities(n_cities=12, stratum_size=60, seed=5)


@pytest.fixture(scope="session")
def small_survey(small_params):
    return generate_survey(small_params, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
