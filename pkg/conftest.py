"""
Shared pytest fixtures
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from core.coeff_dsl import CoefficientSet  # noqa: E402
from core.grid import Grid  # noqa: E402

EXP1_K = "2.1+cos(pi*x)*cos(pi*y)"
EXP2_K = "2.5+sin(x)*sin(y)"
EXP2_R = "1.5+cos(x)*cos(y)"


@pytest.fixture
def grid9():
    return Grid(9)


@pytest.fixture
def grid17():
    return Grid(17)


@pytest.fixture
def grid33():
    return Grid(33)


@pytest.fixture
def constant_coeffs():
    """K ≡ 2, r ≡ 1, u0 ≡ 1, v0 ≡ 0"""
    return CoefficientSet.from_strings(K="2", r="1", u0="1", v0="0")


@pytest.fixture
def exp1_coeffs():
    return CoefficientSet.from_strings(K=EXP1_K, r="1.2", u0="1.8", v0="1.8")


@pytest.fixture
def exp2_coeffs():
    return CoefficientSet.from_strings(K=EXP2_K, r=EXP2_R, u0="1.2", v0="1.2")
