import pytest

from src.characters import AddCharacter
from src.ff_tower import PrimePower, build_ambient


@pytest.fixture(scope="session")
def field_cache():
    built = {}

    def get(p, N, e=1):
        if (p, e, N) not in built:
            built[(p, e, N)] = build_ambient(PrimePower(p, e), N)
        return built[(p, e, N)]

    return get


@pytest.fixture(scope="session")
def F3(field_cache):
    """F_9, housing F_3."""
    return field_cache(3, 2)


@pytest.fixture(scope="session")
def F2(field_cache):
    """F_64, housing F_2, F_4 and F_8."""
    return field_cache(2, 6)


@pytest.fixture
def psi():
    return AddCharacter(1)
