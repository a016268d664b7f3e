"""Shared fixtures: diagram texts used across the suite."""
from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from amalgam.diagram import parse_diagram

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def path_text(n: int, m: int = 3) -> str:
    lines = [f"v {i}" for i in range(1, n + 1)]
    lines += [f"e {i} {i + 1} m={m}" for i in range(1, n)]
    return "\n".join(lines) + "\n"


def cycle_text(n: int, m: int = 3) -> str:
    lines = [f"v {i}" for i in range(1, n + 1)]
    lines += [f"e {i} {i % n + 1} m={m}" for i in range(1, n + 1)]
    return "\n".join(lines) + "\n"


def family_text(k: int, l: int) -> str:
    """Loop 1..k with a tail of l vertices hanging off vertex k."""
    lines = [f"v {i}" for i in range(1, k + l + 1)]
    lines += [f"e {i} {i % k + 1} m=3" for i in range(1, k + 1)]
    prev = k
    for j in range(k + 1, k + l + 1):
        lines.append(f"e {prev} {j} m=3")
        prev = j
    return "\n".join(lines) + "\n"


SIX_VERTEX_TEXT = (DATA / "six-vertex.dyn").read_text()
TRIANGLE_TEXT = cycle_text(3)


@pytest.fixture
def six_vertex():
    return parse_diagram(SIX_VERTEX_TEXT, name="six-vertex")


@pytest.fixture
def square():
    return parse_diagram(cycle_text(4), name="square")


@pytest.fixture
def cycle8():
    return parse_diagram(cycle_text(8), name="cycle8")


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criteria verdicts, one line each."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
