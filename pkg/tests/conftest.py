import pytest

from qpsurf.surface import build_quiver, once_punctured_torus, twice_punctured_genus


@pytest.fixture(scope="session")
def torus_tq():
    return build_quiver(once_punctured_torus())


@pytest.fixture(scope="session")
def fig_tq():
    return build_quiver(twice_punctured_genus(1))


@pytest.fixture(scope="session")
def fig_g2_tq():
    return build_quiver(twice_punctured_genus(2))
