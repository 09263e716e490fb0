"""Shared pinned systems.

Small spaces with hand-checkable behavior; most frozen expectations in the
test modules refer to one of these.
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

from mustab import EndoMap, Measure, validate_space

sys.path.insert(0, str(Path(__file__).parent))  # make `import bruteforce` work

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def two_point():
    return validate_space(("a", "b"), ((0, 1), (1, 0)))


@pytest.fixture
def three_cycle():
    """Three points at mutual distance 1 under the cyclic shift."""
    space = validate_space(
        ("x0", "x1", "x2"), ((0, 1, 1), (1, 0, 1), (1, 1, 0))
    )
    return space, EndoMap(space, (1, 2, 0))


@pytest.fixture
def path_space():
    """Four points on a line, d(i, j) = |i - j|, labels "0".."3"."""
    dist = tuple(
        tuple(Fraction(abs(i - j)) for j in range(4)) for i in range(4)
    )
    return validate_space(("0", "1", "2", "3"), dist)


@pytest.fixture
def cluster_space():
    """A close pair at distance 1/10 plus a third point at distance 1."""
    t = Fraction(1, 10)
    return validate_space(
        ("a", "b", "c"), ((0, t, 1), (t, 0, 1), (1, 1, 0))
    )


@pytest.fixture
def uniform_two(two_point):
    return Measure.uniform(two_point)
