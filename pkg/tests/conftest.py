import pytest

from _nets import ACCEPTANCE_LINES, DATA, binary
from wbfmap.network import parse_network

def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def chain2_path():
    return DATA / "chain2.json"


@pytest.fixture
def chain2():
    return parse_network((DATA / "chain2.json").read_text())


@pytest.fixture
def diamond():
    half = [[0.5, 0.5]]
    return binary(
        ["A", "B", "C", "D"],
        {"A": [], "B": ["A"], "C": ["A"], "D": ["B", "C"]},
        {"A": half, "B": half * 2, "C": half * 2, "D": half * 4},
    )
