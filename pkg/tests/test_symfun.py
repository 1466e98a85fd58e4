import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.config import DEFAULT_SEED
from src.errors import DegenerateLeading, ValidationError
from src.symfun import (
    LPolynomialData,
    delta_deform,
    dickson_eval,
    exterior_trace_from_powers,
    newton_e_from_p,
    newton_h_from_p,
    newton_p_from_e,
    partitions_of,
    phi_mu,
    poly_roots,
    roots_on_unit_circle,
    z_mu,
)

# roots 1, 2, 3
POWER_SUMS = [6, 14, 36, 98]
ELEMENTARY = [1, 6, 11, 6]

unit_roots = st.lists(st.floats(0, 2 * np.pi, exclude_max=True), min_size=1, max_size=6).map(
    lambda angles: np.exp(1j * np.asarray(angles))
)


def coefficients(w):
    """e_0..e_n of the roots w."""
    return [(-1) ** m * c for m, c in enumerate(np.poly(w))]


def test_partitions():
    assert partitions_of(4) == ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))
    assert len(partitions_of(6)) == 11
    assert partitions_of(0) == ((),)
    with pytest.raises(ValidationError):
        partitions_of(-1)


@pytest.mark.parametrize("mu, expected", [((1, 1, 1), 6), ((2, 1, 1), 4), ((3,), 3), ((2, 2), 8)])
def test_z_mu(mu, expected):
    assert z_mu(mu) == expected


def test_phi_mu():
    assert phi_mu((2, 1), 3) == 16


def test_newton():
    assert np.allclose(newton_e_from_p(POWER_SUMS[:3]), ELEMENTARY)
    assert np.allclose(newton_h_from_p(POWER_SUMS[:2]), [1, 6, 25])
    assert np.allclose(newton_p_from_e(ELEMENTARY, 4), POWER_SUMS)


def test_exterior_trace():
    assert exterior_trace_from_powers(POWER_SUMS, 2) == pytest.approx(11)
    assert exterior_trace_from_powers(POWER_SUMS, 3) == pytest.approx(6)
    assert exterior_trace_from_powers(POWER_SUMS, 4) == pytest.approx(0)


def test_dickson():
    # squares 1, 4, 9
    assert dickson_eval(ELEMENTARY, 2, 1) == pytest.approx(14)
    assert dickson_eval(ELEMENTARY, 2, 2) == pytest.approx(49)
    assert dickson_eval(ELEMENTARY, 2, 3) == pytest.approx(36)
    assert dickson_eval(ELEMENTARY, 1, 2) == pytest.approx(11)
    with pytest.raises(ValidationError):
        dickson_eval(ELEMENTARY, 2, 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_newton_matches_polynomial_coefficients(roots):
    w = np.asarray(roots)
    p = [float(np.sum(w**k)) for k in range(1, len(w) + 1)]
    e = newton_e_from_p(p)
    expected = coefficients(w)
    assert np.allclose(e, expected, atol=1e-8)


def test_poly_roots():
    roots = poly_roots([-6, 11, -6, 1])
    assert np.allclose(sorted(r.real for r in roots), [1, 2, 3])
    assert poly_roots([2, 4]) == [-0.5]
    assert poly_roots([1]) == []
    with pytest.raises(DegenerateLeading):
        poly_roots([1, 2, 0])


def test_poly_roots_cyclotomic():
    # X^6 - 1
    roots = poly_roots([-1, 0, 0, 0, 0, 0, 1])
    assert len(roots) == 6
    assert np.allclose(np.abs(roots), 1)
    assert np.allclose(np.asarray(roots) ** 6, 1)


def test_unit_circle():
    ok, deviation = roots_on_unit_circle([1, 0, 1])
    assert ok and deviation < 1e-9
    ok, deviation = roots_on_unit_circle([1, 0, 4])
    assert not ok and deviation == pytest.approx(0.5)


def test_delta_deform():
    assert delta_deform([1, 2, 3], 2) == [1, 4, 3]


def test_lpolynomial_data():
    data = LPolynomialData(3, POWER_SUMS[:3], ELEMENTARY, [1, 2, 3], [1, 0, 0, 1])
    assert data.reverse_characteristic() == [1, -6, 11, -6]
    packed = data.to_json()
    assert packed["n"] == 3
    assert packed["elem"][1] == {"re": 6.0, "im": 0.0}


@settings(max_examples=50, deadline=None)
@given(unit_roots)
def test_newton_round_trip_on_unit_roots(w):
    n = len(w)
    e = newton_e_from_p([complex(np.sum(w**k)) for k in range(1, n + 1)])
    assert np.allclose(e, coefficients(w), atol=1e-10)
    powers = [complex(np.sum(w**k)) for k in range(1, n + 3)]
    assert np.allclose(newton_p_from_e(e, n + 2), powers, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(unit_roots, st.integers(1, 4))
def test_dickson_matches_powered_roots(w, k):
    e, powered = coefficients(w), coefficients(w**k)
    for j in range(1, len(w) + 1):
        assert abs(dickson_eval(e, k, j) - powered[j]) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_exterior_trace_matches_newton(p):
    e = newton_e_from_p(p)
    for m in range(1, len(p) + 1):
        assert abs(exterior_trace_from_powers(p, m) - e[m]) <= 1e-9 * (1 + abs(e[m]))


@pytest.mark.parametrize("delta", [-0.9, -0.5, 0.3, 3**-0.5, 2**-0.5])
def test_delta_deformation_keeps_roots_on_unit_circle(delta):
    rng = np.random.default_rng(DEFAULT_SEED)
    for _ in range(200):
        degree = int(rng.integers(2, 7))
        roots = np.exp(2j * np.pi * rng.uniform(size=degree))
        coeffs = list(np.poly(roots)[::-1])
        ok, deviation = roots_on_unit_circle(delta_deform(coeffs, delta))
        assert ok, (degree, deviation)
