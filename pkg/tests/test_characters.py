import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.characters import (
    AddCharacter,
    CharTuple,
    MulCharacter,
    add_char_value,
    char_descend,
    char_inflate,
    check_add_character,
    default_twists,
    enumerate_char_tuples,
    frobenius_orbit,
    is_regular,
    mul_char_table,
    mul_char_value,
    psi_table,
    unit_phase,
)
from src.errors import DegreeNotDividing, ValidationError, ZeroArgument


def test_unit_phase():
    assert unit_phase(1, 4) == pytest.approx(1j)
    assert unit_phase(-1, 4) == pytest.approx(-1j)
    assert np.allclose(unit_phase([0, 2], 4), [1, -1])


@pytest.mark.parametrize("d", [1, 2, 3, 6])
@pytest.mark.parametrize("k", [0, 1, 5])
def test_orthogonality(F2, d, k):
    modulus = 2**d - 1
    total = mul_char_table(F2, MulCharacter(d, k)).sum()
    expected = modulus if k % modulus == 0 else 0
    assert abs(total - expected) < 1e-9


@given(st.integers(1, 63), st.integers(1, 63), st.integers(0, 62))
def test_mul_char_is_multiplicative(F2, x, y, k):
    chi = MulCharacter(6, k)
    lhs = mul_char_value(F2, chi, F2.mul(x, y))
    assert cmath.isclose(lhs, mul_char_value(F2, chi, x) * mul_char_value(F2, chi, y), abs_tol=1e-12)


@given(st.integers(0, 63), st.integers(0, 63))
def test_add_char_is_additive(F2, x, y):
    psi = AddCharacter(1)
    lhs = add_char_value(F2, psi, F2.add(x, y), 6)
    assert cmath.isclose(lhs, add_char_value(F2, psi, x, 6) * add_char_value(F2, psi, y, 6), abs_tol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3, 6])
def test_psi_sums_to_minus_one_on_units(F2, psi, r):
    assert abs(psi_table(F2, psi, r).sum() + 1) < 1e-9


def test_psi_inverse_is_conjugate(F3, psi):
    inverse = psi.inverse(F3)
    assert inverse.b == 2
    for x in range(9):
        assert cmath.isclose(add_char_value(F3, inverse, x, 2), add_char_value(F3, psi, x, 2).conjugate())


def test_zero_twist_rejected(F3):
    with pytest.raises(ZeroArgument):
        check_add_character(F3, AddCharacter(0))


def test_default_twists(F2, F3):
    assert default_twists(F2) == [AddCharacter(1)]
    assert default_twists(F3) == [AddCharacter(1), AddCharacter(2)]
    for psi in default_twists(F3):
        check_add_character(F3, psi)
        assert abs(psi_table(F3, psi, 2).sum() + 1) < 1e-9


def test_frobenius_orbits():
    assert frobenius_orbit(2, 2, 1) == (1, 2)
    assert frobenius_orbit(3, 2, 4) == (4,)
    assert is_regular(3, 2, 1)
    assert not is_regular(3, 2, 4)


def test_inflate_and_descend():
    assert char_inflate(3, MulCharacter(1, 1), 2) == MulCharacter(2, 4)
    assert char_descend(3, MulCharacter(2, 4)) == MulCharacter(1, 1)
    assert char_descend(3, MulCharacter(2, 1)) == MulCharacter(2, 1)
    with pytest.raises(DegreeNotDividing):
        char_inflate(3, MulCharacter(2, 1), 3)


def test_inflation_agrees_with_norm(F2):
    chi = MulCharacter(2, 1)
    lifted = char_inflate(2, chi, 6)
    for x in F2.subfield_elements(6)[:20]:
        lhs = mul_char_value(F2, lifted, int(x))
        rhs = mul_char_value(F2, chi, F2.norm_to(int(x), 6, 2))
        assert cmath.isclose(lhs, rhs, abs_tol=1e-12)


def test_char_tuples():
    tuples = list(enumerate_char_tuples((2, 1), 3))
    assert len(tuples) == 8 * 2
    assert tuples[0].chars == (MulCharacter(2, 0), MulCharacter(1, 0))
    with pytest.raises(ValidationError):
        CharTuple((2,), (MulCharacter(1, 0),))
