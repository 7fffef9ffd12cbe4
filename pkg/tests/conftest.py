import math

import numpy as np
import pytest
from hypothesis import strategies as st

from logspiral.model import Angles


@st.composite
def ordered_angles(draw, min_M=2, max_M=7):
    """Strictly increasing offsets in (0, 2 pi), at least 1e-3 apart."""
    M = draw(st.integers(min_M, max_M))
    raw = draw(st.lists(st.floats(0.01, 2 * math.pi - 0.01), min_size=M - 1, max_size=M - 1))
    th = np.sort(np.array(raw))
    if M > 2 and np.any(np.diff(th) < 1e-3):
        th = np.linspace(0.3, 2 * math.pi - 0.3, M - 1)
    return Angles(th)


moderate_a = st.floats(min_value=0.5, max_value=50.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    for name, module in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(module, "REPORT", None):
            terminalreporter.section("acceptance criteria")
            for line in sorted(module.REPORT):
                terminalreporter.write_line(line)
