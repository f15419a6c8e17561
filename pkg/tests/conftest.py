import numpy as np
import pytest

from savmag.demag import DemagKernel
from savmag.energy import MaterialParams
from savmag.mesh import Grid


def dense_matrix(op, shape):
    """Assemble a linear operator on arrays of ``shape`` column by column."""
    n = int(np.prod(shape))
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(np.asarray(op(e.reshape(shape))).ravel())
    return np.column_stack(cols)


def random_unit(grid, rng):
    m = rng.normal(size=grid.vector_shape)
    return m / np.linalg.norm(m, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sp1_grid():
    return Grid.from_extent((100, 50, 1), (2e-6, 1e-6, 2e-8))


@pytest.fixture(scope="session")
def sp1_kernel(sp1_grid):
    return DemagKernel(sp1_grid)


@pytest.fixture
def params():
    return MaterialParams()


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def report(key, ok, detail):
    ACCEPTANCE_LINES[key] = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
