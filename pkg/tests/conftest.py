import itertools
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from qcycle.graphs import Graph


def path_graph(L: int) -> Graph:
    """Path with L edges on vertices 1..L+1."""
    return Graph.from_edges(L + 1, [(i, i + 1) for i in range(1, L + 1)])


def cycle_graph(order) -> Graph:
    order = list(order)
    n = max(order)
    return Graph.from_edges(n, [(order[i], order[(i + 1) % len(order)]) for i in range(len(order))])


@st.composite
def graphs(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, frozenset(p for p, k in zip(pairs, keep) if k))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(lines):
        terminalreporter.write_line(lines[num])
