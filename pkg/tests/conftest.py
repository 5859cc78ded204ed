import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rpls.gallery import luroth23, random_alpha_beta, random_beta, single_map  # noqa: E402
from rpls.scalar import golden_ratio  # noqa: E402


@pytest.fixture
def beta():
    return golden_ratio()


@pytest.fixture
def golden_beta():
    return random_beta(golden_ratio(), Fraction(1, 3))


@pytest.fixture
def golden_half():
    return random_beta(golden_ratio(), Fraction(1, 2))


@pytest.fixture
def lueroth():
    return luroth23(Fraction(1, 3))


@pytest.fixture
def alpha_beta():
    return random_alpha_beta("1/beta", golden_ratio(), Fraction(1, 4))


@pytest.fixture
def doubling():
    return single_map("doubling")


def gallery_systems():
    b = golden_ratio()
    return {
        "golden_beta": random_beta(b, Fraction(1, 3)),
        "golden_half": random_beta(b, Fraction(1, 2)),
        "lueroth": luroth23(Fraction(1, 3)),
        "alpha_beta": random_alpha_beta("1/beta", b, Fraction(1, 4)),
        "tent": single_map("tent"),
        "three_branch": single_map("three_branch"),
    }


@pytest.fixture(params=sorted(gallery_systems()))
def gallery_system(request):
    return gallery_systems()[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
