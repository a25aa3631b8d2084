import itertools
from fractions import Fraction

import pytest

from dagci import Dag, JointDist


@pytest.fixture
def chain3():
    return Dag(3, frozenset({(0, 1), (1, 2)}), ("a", "b", "c"))


@pytest.fixture
def collider3():
    # 0 -> 2 <- 1
    return Dag(3, frozenset({(0, 2), (1, 2)}))


@pytest.fixture
def xor_triple():
    """V1, V3 iid uniform bits, V2 = V1 xor V3 (variables in index order)."""
    mass = {}
    for v1, v3 in itertools.product((0, 1), repeat=2):
        mass[(v1, v1 ^ v3, v3)] = Fraction(1, 4)
    return JointDist(("V1", "V2", "V3"), (2, 2, 2), mass)


@pytest.fixture
def two_fair_bits():
    mass = {
        (a, b): Fraction(1, 4) for a, b in itertools.product((0, 1), repeat=2)
    }
    return JointDist(("A", "B"), (2, 2), mass)
