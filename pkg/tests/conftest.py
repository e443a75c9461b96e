import numpy as np
import pytest

from hvsolve.basis_search import select_best
from hvsolve.problems import builtin


@pytest.fixture(scope="session")
def sys_a():
    return builtin("SYS-A")


@pytest.fixture(scope="session")
def sys_b():
    return builtin("SYS-B")


@pytest.fixture(scope="session")
def sys_c():
    return builtin("SYS-C")


@pytest.fixture(scope="session")
def tpl_a(sys_a):
    return select_best(sys_a[0])


@pytest.fixture(scope="session")
def tpl_b(sys_b):
    return select_best(sys_b[0])


@pytest.fixture(scope="session")
def tpl_c(sys_c):
    return select_best(sys_c[0])


def assert_point_sets_match(solutions, expected, tol=1e-8):
    """Every expected root appears among the solutions and vice versa."""
    points = [s.point for s in solutions]
    assert len(points) == len(expected), (points, expected)
    remaining = list(points)
    for root in expected:
        dists = [max(abs(p - complex(r)) for p, r in zip(pt, root)) for pt in remaining]
        j = int(np.argmin(dists))
        assert dists[j] < tol, (root, remaining)
        remaining.pop(j)
