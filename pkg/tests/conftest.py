import numpy as np
import pytest

from parajacobi import _kernels
from parajacobi.modulation import (
    Explicit,
    Power,
    PowerShift,
    SqrtProduct,
    build_model,
)
from parajacobi.periodic import PeriodicParams


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Compile the numba kernels once so timed assertions never pay for it.
    _kernels.warm_up()


@pytest.fixture(scope="session")
def m1():
    """Reference hard-edge model: a_n = (n+1)^0.6, b_n = -2 a_n."""
    return build_model(PeriodicParams(1, [1.0], [-2.0]), Power(gamma=0.6),
                       horizon=4_000_000)


@pytest.fixture(scope="session")
def m1_small():
    """Same model with a short horizon for quick structural tests."""
    return build_model(PeriodicParams(1, [1.0], [-2.0]), Power(gamma=0.6),
                       horizon=300_000)


@pytest.fixture(scope="session")
def laguerre0():
    """Classical Laguerre parameters (weight exp(-x) on the positive axis)."""
    return build_model(
        PeriodicParams(1, [1.0], [2.0]),
        SqrtProduct(0.0),
        b_family=PowerShift(gamma=1.0, c=2.0, shift=-1.0),
        horizon=2_000_000,
    )


def model_from_arrays(avals, bvals, alpha=None, beta=None, s=None, r=None):
    """Helper: model with explicit coefficient arrays (for structural tests)."""
    avals = np.asarray(avals, dtype=float)
    bvals = np.asarray(bvals, dtype=float)
    n = 1 if alpha is None else len(alpha)
    p = PeriodicParams(n, alpha or [1.0], beta or [0.0])
    if s is None:
        s = np.zeros(n)
        r = np.zeros(n)
    return build_model(p, Explicit(avals), b_family=Explicit(bvals),
                       s=s, r=r, horizon=len(avals) - 1)
