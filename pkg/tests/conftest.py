from fractions import Fraction

import pytest

from pathtsp import build_appendix_instance, narrow_cuts
from pathtsp.parity import GammaParams


@pytest.fixture(scope="session")
def appendix0():
    """(Instance, xstar, four-tree distribution) for the base wall fixture."""
    return build_appendix_instance(0)


@pytest.fixture(scope="session")
def appendix0_chain(appendix0):
    inst, xstar, _ = appendix0
    return narrow_cuts(xstar, inst)


@pytest.fixture(scope="session")
def params():
    return GammaParams()


@pytest.fixture(scope="session")
def legacy_params():
    return GammaParams(beta=Fraction(2, 5))
