import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from vspc.graph import from_edge_list, is_connected

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=2, max_n=8, connected=False):
    """Random simple graphs drawn as subsets of the vertex pairs."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = from_edge_list(n, [e for e, k in zip(pairs, keep) if k])
    if connected:
        # splice a random spanning path in so the draw is never rejected
        order = draw(st.permutations(range(n)))
        extra = list(zip(order, order[1:]))
        g = from_edge_list(n, g.edges() + [(min(e), max(e)) for e in extra])
        assert is_connected(g)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def union_find_components(n, edges):
    """Independent connectivity oracle (no BFS, no bitmasks)."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(i) for i in range(n)})


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    verdict = "PASS" if rep.passed else "FAIL"
    line = f"criterion {number:>2}: {verdict}  {title}"
    item.config._criteria.append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(getattr(config, "_criteria", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
