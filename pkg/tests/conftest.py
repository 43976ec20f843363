import numpy as np
import pytest

from dcquartic import validate_instance


@pytest.fixture(scope="session")
def p_tri():
    """n = N = 1 instance with three critical points: local minima at
    +-sqrt(2) (J = -1/2) and a local max at 0 (J = 0)."""
    return validate_instance([-1.0], [[1.0]], [1.0], [0.0], [0.0], 1.0)


@pytest.fixture(scope="session")
def p_min():
    """n = N = 1 instance whose only critical point x0 = 0 is the global
    minimum with multiplier in A* (J = 1/2)."""
    return validate_instance([1.0], [[1.0]], [1.0], [1.0], [0.0], 2.0)


@pytest.fixture(scope="session")
def sqrt2():
    return float(np.sqrt(2.0))
