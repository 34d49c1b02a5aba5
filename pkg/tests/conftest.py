import pytest

from bpt.grid import make_frequency_grid
from bpt.jsa import GaussianJsaParams, build_gaussian_jsa

SHORTER = GaussianJsaParams(0.1, 2e12, 2e12)
LONGER = GaussianJsaParams(0.1, 1.5e12, 2.4e12)

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def grid_for(params, n=256):
    return make_frequency_grid(0.0, 12 * max(params.sigma_p, params.sigma_c), n)


@pytest.fixture
def longer_jsa():
    g = grid_for(LONGER)
    return build_gaussian_jsa(LONGER, g, g)


@pytest.fixture
def shorter_jsa():
    g = grid_for(SHORTER)
    return build_gaussian_jsa(SHORTER, g, g)
