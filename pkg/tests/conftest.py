import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lprecon import groupoid as gpd  # noqa: E402


@pytest.fixture
def P2():
    return gpd.pair(2)


@pytest.fixture
def P3():
    return gpd.pair(3)


@pytest.fixture
def Z2():
    return gpd.group_cyclic(2)


@pytest.fixture
def Z4():
    return gpd.group_cyclic(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Call with ``(label, ok, detail)``; lines are echoed now and in the terminal summary."""
    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
