import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from maskrefine.core import DEFAULT_SCHEDULE


@pytest.fixture
def schedule():
    return DEFAULT_SCHEDULE


def random_mask(gen, shape, p=0.5):
    return (gen.random(shape) < p).astype(np.uint8)


def random_blob(gen, size=64):
    """A filled ellipse (convex) somewhere inside a ``size x size`` frame."""
    rr, cc = np.mgrid[:size, :size]
    cy, cx = gen.uniform(0.3, 0.7, 2) * size
    ay, ax = gen.uniform(0.1, 0.25, 2) * size
    return ((((rr - cy) / ay) ** 2 + ((cc - cx) / ax) ** 2) <= 1).astype(np.uint8)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


# acceptance criteria record one line each; printed after the run
ACCEPTANCE_LINES = []


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
