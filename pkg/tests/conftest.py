import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from welfarist.model import Allocation, Profile  # noqa: E402

F = Fraction


@pytest.fixture
def two_by_two():
    return Profile.from_matrix([[2, 1], [1, 2]])


@pytest.fixture
def util_gadget():
    """Gadget for sum(u) at x=(1,2), k=1, eps=1/2."""
    return Profile.from_matrix([[1, 1, F(1, 2)], [2, 2, 0]])


@pytest.fixture
def util_gadget_maximizer():
    return Allocation((frozenset({2}), frozenset({0, 1})))
