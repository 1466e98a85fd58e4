"""
Gauss sums, etale-algebra Gauss sums and exotic Kloosterman sums.

All large sums run over dlog blocks in a fixed order and are reduced with
math.fsum on the real and imaginary parts, chunk by chunk.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.characters import (
    AddCharacter,
    CharTuple,
    MulCharacter,
    TWO_PI_I,
    char_inflate,
    check_add_character,
    mul_char_value,
    psi_table,
    unit_phase,
)
from src.config import CHUNK_SIZE, MAX_SUM_TERMS
from src.errors import CostExceeded, DegreeMismatch, ValidationError, ZeroArgument
from src.etale import EtaleTensorAlgebra


def compensated_sum(values):
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def check_cost(terms, force=False, what="sum"):
    if terms > MAX_SUM_TERMS and not force:
        raise CostExceeded(f"{what} needs {terms} terms (limit {MAX_SUM_TERMS}); use --force")


@dataclass(frozen=True)
class KloostermanSpec:
    lam: tuple
    chi: CharTuple
    psi: AddCharacter
    a: int
    m: int

    def __post_init__(self):
        if tuple(self.lam) != tuple(self.chi.mu):
            raise DegreeMismatch(f"character degrees {self.chi.mu} do not match {self.lam}")
        if self.a == 0:
            raise ZeroArgument("Kloosterman argument must be nonzero")
        if self.m < 1:
            raise ValidationError(f"extension degree must be positive, got {self.m}")


# --- Gauss sums ---

@lru_cache(maxsize=None)
def _gauss_sum(F, degree, exponent, b):
    modulus = F.q**degree - 1
    j = np.arange(modulus, dtype=np.int64)
    terms = unit_phase(-j * (exponent % modulus), modulus) * psi_table(F, AddCharacter(b), degree)
    return -compensated_sum(np.atleast_1d(terms))


def gauss_sum(F, gamma, psi):
    """tau(gamma, psi_r) = -sum_{xi in F_{q^r}^x} gamma^-1(xi) psi_r(xi)."""
    F.check_degree(gamma.degree)
    check_add_character(F, psi)
    return _gauss_sum(F, gamma.degree, gamma.exponent % (F.q**gamma.degree - 1), psi.b)


def _product_exponent(q, alpha, beta, i):
    """Exponent of alpha o N_{l/n} * beta^(q^i) o N_{l/m} on F_{q^l}."""
    n, m = alpha.degree, beta.degree
    l = math.lcm(n, m)
    modulus = q**l - 1
    a = char_inflate(q, alpha, l).exponent
    b = char_inflate(q, beta.frobenius(q, i), l).exponent
    return MulCharacter(l, (a + b) % modulus)


def tau_nm(F, alpha, beta, psi):
    """tau_{n,m}(alpha x beta, psi) = prod_{k=1}^d tau(alpha o N * beta^(q^(k-1)) o N, psi_l)."""
    d = math.gcd(alpha.degree, beta.degree)
    out = 1 + 0j
    for i in range(d):
        out *= gauss_sum(F, _product_exponent(F.q, alpha, beta, i), psi)
    return out


def tau_lambda_m(F, alpha, beta, psi):
    """tau_{lambda,m}(alpha x beta, psi) = prod_j tau_{n_j,m}(alpha_j x beta, psi)."""
    out = 1 + 0j
    for chi in alpha.chars:
        out *= tau_nm(F, chi, beta, psi)
    return out


def _unit_sum(F, A, chars, beta, psi, blocks):
    """Sum over dlog blocks of prod chi_i(N_1) * beta(N_2) * psi(Tr)."""
    tables = {l: psi_table(F, psi, l) for _, _, l in A.coordinates}
    partial = []
    for block in blocks:
        turns = np.zeros(len(block))
        for chi, e1 in zip(chars, A.norm1_exponents(block)):
            modulus = F.q**chi.degree - 1
            turns += ((e1 * (chi.exponent % modulus)) % modulus) / modulus
        if beta is not None:
            modulus = F.q**beta.degree - 1
            e2 = A.norm2_exponents(block)
            turns += ((e2 * (beta.exponent % modulus)) % modulus) / modulus
        values = np.exp(TWO_PI_I * turns)
        for col, (_, _, l) in enumerate(A.coordinates):
            values = values * tables[l][block[:, col]]
        partial.append(compensated_sum(values))
    return compensated_sum(partial)


def tau_lambda_m_direct(F, alpha, beta, psi, force=False):
    """(-1)^(nm+n+rm) sum_{xi in (F_lambda (x) F_m)^x} alpha^-1(N_1 xi) beta^-1(N_2 xi) psi(Tr xi)."""
    check_add_character(F, psi)
    lam = alpha.mu
    n, m, r = sum(lam), beta.degree, len(lam)
    A = EtaleTensorAlgebra(F, lam, m)
    check_cost(A.unit_count, force, "etale Gauss sum")
    inv_chars = alpha.inverse(F.q).chars
    total = _unit_sum(F, A, inv_chars, beta.inverse(F.q), psi, A.unit_exponent_blocks(CHUNK_SIZE))
    return (-1) ** (n * m + n + r * m) * total


def kloosterman(F, ksum, force=False):
    """J_m(chi, psi, a) = sum_{N_2 x = a} chi(N_1 x) psi(Tr x)."""
    check_add_character(F, ksum.psi)
    F.require_subfield(ksum.a, 1)
    A = EtaleTensorAlgebra(F, ksum.lam, ksum.m)
    check_cost(A.fiber_size, force, "Kloosterman sum")
    a_exp = F.dlog_in(ksum.a, ksum.m)
    return _unit_sum(F, A, ksum.chi.chars, None, ksum.psi, A.fiber_exponent_blocks(a_exp, CHUNK_SIZE))


def kloosterman_mellin(F, alpha, beta, psi, force=False):
    """sum_{a in F_m^x} beta^-1(a) J_m(alpha, psi, a); equals
    (-1)^(nm+n+rm) tau_{lambda,m}(alpha^-1 x beta, psi)."""
    check_add_character(F, psi)
    m = beta.degree
    A = EtaleTensorAlgebra(F, alpha.mu, m)
    check_cost(A.unit_count, force, "Mellin transform")
    beta_inv = beta.inverse(F.q)
    terms = []
    # a runs over all of F_{q^m}^x, not only F_q^x
    for a_exp, a in enumerate(F.subfield_elements(m)):
        j = _unit_sum(F, A, alpha.chars, None, psi, A.fiber_exponent_blocks(a_exp, CHUNK_SIZE))
        terms.append(mul_char_value(F, beta_inv, int(a)) * j)
    return compensated_sum(terms)


# --- Appendix lemmas as executable checks ---

def gauss_orbit_period(F, alpha, beta, psi, i):
    """Gauss sums of alpha o N * beta^(q^i) o N repeat with period gcd(n, m) in i."""
    d = math.gcd(alpha.degree, beta.degree)
    lhs = gauss_sum(F, _product_exponent(F.q, alpha, beta, i + d), psi)
    rhs = gauss_sum(F, _product_exponent(F.q, alpha, beta, i), psi)
    return lhs, rhs


def quadratic_lift_point(F, m):
    """z in F_{q^{2m}} with z^(q^m - 1) = -1; in characteristic 2 that is z = 1."""
    if F.p == 2:
        return 1
    return F.from_dlog((F.q**m + 1) // 2, 2 * m)


def gauss_quadratic_lift(F, beta, psi):
    """For beta on F_{q^{2m}} trivial on F_{q^m}^x: tau(beta, psi_2m) = -q^m beta^-1(z)."""
    if beta.degree % 2:
        raise DegreeMismatch("character must live on an even-degree field")
    m = beta.degree // 2
    if beta.exponent % (F.q**(2 * m) - 1) == 0:
        raise ValidationError("character must be nontrivial")
    if beta.exponent % (F.q**m - 1):
        raise ValidationError("character is not trivial on F_(q^m)^x")
    z = quadratic_lift_point(F, m)
    lhs = gauss_sum(F, beta, psi)
    rhs = -(F.q**m) * mul_char_value(F, beta.inverse(F.q), z)
    return lhs, rhs


def hasse_davenport(F, gamma, l, psi):
    """tau(gamma o N_{l/d}, psi_l) against tau(gamma, psi_d)^(l/d)."""
    lhs = gauss_sum(F, char_inflate(F.q, gamma, l), psi)
    rhs = gauss_sum(F, gamma, psi) ** (l // gamma.degree)
    return lhs, rhs
