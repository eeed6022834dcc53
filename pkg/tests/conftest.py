import sys

import pytest

from hyperdoc import fixtures
from hyperdoc.cli import FIXTURES


@pytest.fixture(scope="session")
def subsets():
    return fixtures.gen_subset_doctrine()


@pytest.fixture(scope="session")
def chain():
    return fixtures.gen_chain_fixture()


@pytest.fixture(scope="session")
def thin():
    return fixtures.gen_thin_fixture()


@pytest.fixture(scope="session")
def cube():
    return fixtures.gen_bool_point()


@pytest.fixture(params=sorted(FIXTURES))
def any_fixture(request):
    return FIXTURES[request.param]()


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    lines = getattr(acc, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
