import numpy as np
import pytest

from compactseg.grid import GridDomain, build_edges


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid_graph(dims, conn=None):
    return build_edges(GridDomain(dims), conn)


def single_pixel(dims, coord):
    domain = GridDomain(dims)
    y = np.zeros(domain.size, np.uint8)
    y[domain.index(coord)] = 1
    return y


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, line

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(line(number, *RESULTS[number]))
