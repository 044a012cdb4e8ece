import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from digraphon.core import StepDigraphon  # noqa: E402
from digraphon.fixtures import random_measures  # noqa: E402

ACCEPTANCE_LINES = []


def random_periodic(rng, d, sizes=None):
    """Strongly connected digraphon whose support only flows P_j -> P_{j+1}."""
    if sizes is None:
        sizes = rng.integers(1, 3, size=d)
    t = int(sum(sizes))
    cls = np.repeat(np.arange(d), sizes)
    vals = np.zeros((t, t))
    for i in range(t):
        for j in range(t):
            if cls[j] == (cls[i] + 1) % d:
                vals[i, j] = rng.uniform(0.3, 1.0)
    return StepDigraphon(random_measures(rng, t), vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
