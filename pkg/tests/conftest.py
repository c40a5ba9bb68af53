import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from priorquant import CostPair, GaussianMeasurementModel, parse_prior  # noqa: E402


@pytest.fixture
def model():
    return GaussianMeasurementModel(1.0, 1.0)


@pytest.fixture
def equal():
    return CostPair(1.0, 1.0)


@pytest.fixture
def uniform():
    return parse_prior("uniform")


@pytest.fixture
def beta52():
    return parse_prior("beta:5,2")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
