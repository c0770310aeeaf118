import sys
from pathlib import Path

import pytest

from lpsram.defects import TechnologyProfile

# make tests/oracle.py importable as a plain module
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def profile():
    return TechnologyProfile()


_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; its line is printed in the terminal summary."""

    def register(key: str, title: str) -> None:
        _CRITERIA[request.node.nodeid] = (key, title)

    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.nodeid in _CRITERIA and rep.when == "call":
        key, title = _CRITERIA[item.nodeid]
        _CRITERIA[item.nodeid] = (key, title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    lines = sorted(v for v in _CRITERIA.values() if len(v) == 3)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key, title, status in lines:
        terminalreporter.write_line(f"[{status}] criterion {key}: {title}")
