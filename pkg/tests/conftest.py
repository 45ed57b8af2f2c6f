import math

import numpy as np
import pytest

from lauewalk.lattice import BeamState, NodeParameterSource

S2 = math.sqrt(2)


def dense_plane_matrix(source, plane, lo, hi):
    """Explicit unitary of one plane on the index window [lo, hi] (test oracle).

    Basis order: a_lo..a_hi then b_lo..b_hi.  Rays that would leave the
    window are dropped, so callers must size the window generously.
    """
    source = NodeParameterSource.of(source)
    n = hi - lo + 1
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for p in range(n):
        j = lo + p
        c = source.coefficients_at(plane, j)
        if p + 1 < n:
            m[p + 1, p] += c.t_a
            m[p + 1, n + p] += c.r_b
        if p - 1 >= 0:
            m[n + p - 1, p] += c.r_a
            m[n + p - 1, n + p] += c.t_b
    return m


def dense_propagate(state, planes, source, margin=2):
    """Propagate by multiplying explicit plane matrices on a fixed window."""
    lo = state.base_index - planes - margin
    hi = state.base_index + len(state) + planes + margin
    n = hi - lo + 1
    s = state.reindexed(lo, n)
    vec = np.concatenate([s.up, s.down])
    for k in range(planes):
        vec = dense_plane_matrix(source, k, lo, hi) @ vec
    return BeamState(lo, vec[:n], vec[n:])


@pytest.fixture
def a0():
    return BeamState.ray("a", 0)


@pytest.fixture
def rng():
    return np.random.default_rng(20161017)


def random_state(rng, width=5, base=-2):
    v = rng.normal(size=(2, width)) + 1j * rng.normal(size=(2, width))
    v /= np.linalg.norm(v)
    return BeamState(base, v[0], v[1])


# collect acceptance outcomes so they can be listed in the terminal summary
_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _ACCEPTANCE.append((doc, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {doc}")
