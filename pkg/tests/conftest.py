import numpy as np
import pytest

from cartankit import klein


@pytest.fixture(scope="session")
def se2():
    return klein.get_geometry("se2-plane")


@pytest.fixture(scope="session")
def e3():
    return klein.get_geometry("e3-space")


@pytest.fixture(scope="session")
def so3():
    return klein.get_geometry("so3-sphere")


@pytest.fixture(scope="session")
def catalog():
    return {name: klein.get_geometry(name) for name in
            ["se2-plane", "e3-space", "so3-sphere", "so2-circle",
             "so4-sphere3", "affine2-plane", "equiaffine2-plane"]}


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
