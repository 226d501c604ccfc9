import pytest

from tauberlab.semigroup import build_semigroup

BEURLING = {"generator": "beurling", "A": 1.0, "gamma": 2.5, "seed": 1, "x_max": 1e6}


@pytest.fixture(scope="session")
def classical_1e6():
    return build_semigroup({"generator": "classical", "x_max": 1e6})


@pytest.fixture(scope="session")
def classical_1e4():
    return build_semigroup({"generator": "classical", "x_max": 1e4})


@pytest.fixture(scope="session")
def toy23():
    return build_semigroup({"generator": "explicit", "norms": [2, 3], "x_max": 1e4})


@pytest.fixture(scope="session")
def identity_only():
    return build_semigroup({"generator": "explicit", "norms": [], "x_max": 1e4})


@pytest.fixture(scope="session")
def beurling_1e6():
    return build_semigroup(BEURLING)


@pytest.fixture(scope="session")
def classical_1e5():
    return build_semigroup({"generator": "classical", "x_max": 1e5})
