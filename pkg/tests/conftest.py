import numpy as np
import pytest
from hypothesis import strategies as st

from fixpoint.coupled_tripled import coupled_matrix, tripled_matrix

SYM = np.array([[0.5, 0.25], [0.25, 0.5]])


@pytest.fixture
def sym():
    return SYM.copy()


@pytest.fixture
def tripled02():
    return tripled_matrix((0.2, 0.2, 0.2))


@pytest.fixture
def coupled08():
    return coupled_matrix(0.8)


def nonneg_matrices(max_n=6, max_value=2.0):
    """Random nonnegative square matrices with some exact zeros."""

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        entry = st.one_of(st.just(0.0), st.floats(1e-6, max_value, allow_nan=False, allow_infinity=False))
        rows = draw(st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n))
        return np.array(rows, dtype=float)

    return build()


def spectral_radius_oracle(a):
    return float(np.max(np.abs(np.linalg.eigvals(a)))) if a.size else 0.0


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
