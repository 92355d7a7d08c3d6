import pytest

from concrete_fatigue.loading import CycleDiscretization
from concrete_fatigue.material import MaterialParameters
from concrete_fatigue.simulator import build_sn_table


@pytest.fixture(scope="session")
def params():
    return MaterialParameters()


@pytest.fixture(scope="session")
def disc():
    return CycleDiscretization()


@pytest.fixture(scope="session")
def sn_high(params, disc):
    """S-N table for the three fastest levels (keeps unit tests quick)."""
    return build_sn_table(params, (0.80, 0.85, 0.90), 0.2, disc=disc)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_report(request):
    return request.config.acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (int(s.split()[1].rstrip(":")), s)):
            terminalreporter.write_line(line)
