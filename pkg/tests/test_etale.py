import pytest

from src.errors import ValidationError, ZeroArgument
from src.etale import EtaleTensorAlgebra


@pytest.mark.parametrize(
    "lam, m, units, fiber",
    [((1, 1), 2, 9, 3), ((2,), 2, 9, 3), ((2, 1), 2, 27, 9), ((3,), 2, 63, 21)],
)
def test_sizes(F2, lam, m, units, fiber):
    A = EtaleTensorAlgebra(F2, lam, m)
    assert A.unit_count == units
    assert A.fiber_size == fiber


def test_rejects_bad_data(F2):
    with pytest.raises(ValidationError):
        EtaleTensorAlgebra(F2, (), 1)
    with pytest.raises(ValidationError):
        EtaleTensorAlgebra(F2, (2,), 0)


@pytest.mark.parametrize("lam, m", [((1, 1), 1), ((1, 1), 2), ((2, 1), 2), ((2,), 3)])
def test_fibers_partition_units(F2, lam, m):
    A = EtaleTensorAlgebra(F2, lam, m)
    seen = set()
    for a in F2.subfield_elements(m):
        elements = list(A.norm2_fiber(int(a)))
        assert len(elements) == A.fiber_size
        assert all(A.norm2(x) == a for x in elements)
        seen.update(elements)
    assert len(seen) == A.unit_count


def test_small_fiber_by_hand(F3):
    # x1 x2 = -1 in F_3: (1, 2) and (2, 1)
    A = EtaleTensorAlgebra(F3, (1, 1), 1)
    assert sorted(A.norm2_fiber(2)) == [((1,), (2,)), ((2,), (1,))]
    with pytest.raises(ZeroArgument):
        list(A.norm2_fiber(0))


@pytest.mark.parametrize("n, m", [(2, 2), (3, 2), (2, 3), (1, 3), (3, 3), (6, 1)])
def test_pure_tensor_norms_and_trace(F2, n, m):
    A = EtaleTensorAlgebra(F2, (n,), m)
    for a in F2.subfield_elements(n)[:5]:
        for b in F2.subfield_elements(m)[:5]:
            a, b = int(a), int(b)
            x = (A.embed_pure_tensor(0, a, b),)
            assert A.norm1(x) == (F2.mul(F2.power(a, m), F2.norm_to(b, m, 1)),)
            assert A.norm2(x) == F2.mul(F2.norm_to(a, n, 1), F2.power(b, n))
            assert A.abs_trace(x) == F2.mul(F2.trace_to(a, n, 1), F2.trace_to(b, m, 1))


def test_exponent_maps_match_elementwise(F2):
    A = EtaleTensorAlgebra(F2, (2, 1), 2)
    block = next(A.unit_exponent_blocks(chunk=10))
    n1 = A.norm1_exponents(block)
    n2 = A.norm2_exponents(block)
    for idx, row in enumerate(block):
        x = A.element_from_exponents(row)
        first, second = A.norm1(x)
        assert F2.dlog_in(first, 2) == n1[0][idx]
        assert F2.dlog_in(second, 1) == n1[1][idx]
        assert F2.dlog_in(A.norm2(x), 2) == n2[idx]
