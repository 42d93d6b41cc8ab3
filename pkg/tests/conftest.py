import random

import pytest

from pairlab.algebra import TOY, make_params
from pairlab.randtable import generate_table

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def toy():
    return TOY


@pytest.fixture(scope="session")
def big():
    return make_params(32)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def toy_table(toy):
    return generate_table(60, toy, seed=5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
