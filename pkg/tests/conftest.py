import pytest
from hypothesis import HealthCheck, settings

from secretcorr.omega import GroupConfig, OmegaParams, build_omega_distribution

settings.register_profile("default", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

@pytest.fixture
def p1_params():
    return OmegaParams.from_strings(3, ["1/6", "1/6", "0", "1/6"])


@pytest.fixture
def pres_params():
    return OmegaParams.from_strings(3, ["1/6", "1/9", "1/9", "1/9"])


@pytest.fixture
def p1(p1_params):
    return build_omega_distribution(p1_params)


@pytest.fixture
def pres(pres_params):
    return build_omega_distribution(pres_params)


@pytest.fixture
def singletons3():
    return GroupConfig.singletons(3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
