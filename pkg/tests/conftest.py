import numpy as np
import pytest

from pathmetric import catalog
from pathmetric.integrals import picard_fuchs_solve


@pytest.fixture(scope="session")
def pf_unit_interval():
    return picard_fuchs_solve((0.1, 0.9))


@pytest.fixture(scope="session")
def pf_right_branch():
    # covers the 0 < y < 1 < x chart used by the PVI trajectory checks
    return picard_fuchs_solve((1.05, 4.0), anchor=2.0)


@pytest.fixture(scope="session")
def pvi_flat_coeffs():
    from fractions import Fraction

    return catalog.get_equation("PVI", dict(alpha=0, beta=0, gamma=0, delta=Fraction(1, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
