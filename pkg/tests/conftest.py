import numpy as np
import pytest

from lpsquare.atoms import build_atom
from lpsquare.kernel import get_kernel
from lpsquare.operators import OperatorParams, field_for


@pytest.fixture(scope="session")
def kernel():
    return get_kernel("circle-harmonic-1")


@pytest.fixture(scope="session")
def atom():
    """The standard instance: p=1 bump atom on B(0, 1)."""
    return build_atom(2, 1.0, (np.zeros(2), 1.0), "bump")


@pytest.fixture(scope="session")
def params():
    return OperatorParams()


@pytest.fixture(scope="session")
def fitted(kernel, atom, params):
    return field_for(kernel, atom, params.rho)
