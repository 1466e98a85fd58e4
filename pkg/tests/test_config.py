import pytest

from src.config import (
    CACHE_ENV_VAR,
    MATCH_TOL,
    ROOT_TOL,
    ROUTE_TOL,
    TaskConfig,
    Tolerances,
    atol,
    close,
    default_cache_dir,
)


def test_atol_grows_with_terms_and_value():
    assert atol(0, 0) == 0
    assert atol(0, 10**6) == pytest.approx(1e-6)
    assert atol(100, 0) == pytest.approx(1e-7)


def test_close():
    assert close(1 + 1j, 1 + 1j + 1e-10, 1e-9)
    assert not close(1, 1.1, 1e-3)


def test_tolerance_override():
    assert Tolerances.from_override(None) == Tolerances(ROUTE_TOL, ROOT_TOL, MATCH_TOL)
    loose = Tolerances.from_override(1e-3)
    assert (loose.route, loose.roots, loose.match) == (1e-3, 1e-3, 1e-3)
    tight = Tolerances.from_override(1e-10)
    assert (tight.route, tight.roots, tight.match) == (1e-10, ROOT_TOL, MATCH_TOL)


@pytest.mark.parametrize(
    "n, m_max, k, expected",
    [(1, None, 1, 1), (2, None, 1, 2), (3, None, 1, 6), (2, 3, 1, 6), (2, None, 2, 4), (4, None, 3, 36)],
)
def test_field_degree(n, m_max, k, expected):
    assert TaskConfig(p=3, n=n, k=k).field_degree(m_max=m_max) == expected


def test_q_and_cache_dir(monkeypatch, tmp_path):
    assert TaskConfig(p=2, e=3).q == 8
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    assert default_cache_dir() is None
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path))
    assert default_cache_dir() == tmp_path
