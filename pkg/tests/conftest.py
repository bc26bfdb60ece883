import numpy as np
import pytest

import mevolve as mv


@pytest.fixture(scope="session")
def dirichlet8():
    return mv.build_laplacian_1d(8, "dirichlet")


@pytest.fixture(scope="session")
def neumann9():
    return mv.build_laplacian_1d(9, "neumann")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def grid(values, components=1):
    return mv.GridFunction(np.asarray(values, dtype=float), components)
