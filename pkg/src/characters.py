"""
Multiplicative and additive characters of the subfields of an ambient field.

A multiplicative character of F_{q^d}^x is stored as an exponent k: its value
at g_d^j is exp(2 pi i k j / (q^d - 1)). Values are computed from the reduced
fraction k j / (q^d - 1) mod 1, never by repeated multiplication.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.errors import DegreeNotDividing, ValidationError, ZeroArgument

TWO_PI_I = 2j * math.pi


def unit_phase(numerator, denominator):
    """exp(2 pi i numerator/denominator), vectorized; numerator reduced first."""
    num = np.mod(np.asarray(numerator, dtype=np.int64), denominator)
    out = np.exp(TWO_PI_I * num / denominator)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, order=True)
class MulCharacter:
    degree: int
    exponent: int

    def normalized(self, q):
        return MulCharacter(self.degree, self.exponent % (q**self.degree - 1))

    def inverse(self, q):
        return MulCharacter(self.degree, (-self.exponent) % (q**self.degree - 1))

    def frobenius(self, q, i=1):
        """chi^(q^i)."""
        modulus = q**self.degree - 1
        return MulCharacter(self.degree, (self.exponent * pow(q, i, modulus)) % modulus)

    def to_json(self):
        return {"degree": self.degree, "exponent": self.exponent}


@dataclass(frozen=True)
class AddCharacter:
    """psi_b(x) = exp(2 pi i Tr_{F_q/F_p}(b x) / p), b a nonzero code of F_q."""

    b: int = 1

    def inverse(self, F):
        return AddCharacter(F.neg(self.b))


@dataclass(frozen=True)
class CharTuple:
    mu: tuple
    chars: tuple

    def __post_init__(self):
        if len(self.mu) != len(self.chars):
            raise ValidationError(f"{len(self.chars)} characters for partition {self.mu}")
        for m, chi in zip(self.mu, self.chars):
            if chi.degree != m:
                raise ValidationError(f"character degree {chi.degree} does not match part {m}")

    def inverse(self, q):
        return CharTuple(self.mu, tuple(chi.inverse(q) for chi in self.chars))

    def to_json(self):
        return [chi.to_json() for chi in self.chars]


def check_add_character(F, psi):
    if psi.b == 0:
        raise ZeroArgument("additive character twist must be nonzero")
    F.require_subfield(psi.b, 1)


def default_twists(F):
    """psi_1, plus psi_g for the generator g of F_q^x when q > 2."""
    twists = [AddCharacter(1)]
    g = F.from_dlog(1, 1)
    if g != 1:
        twists.append(AddCharacter(g))
    return twists


# --- Evaluation ---

def mul_char_value(F, chi, x):
    """chi(x) for x in F_{q^d}^x."""
    j = F.dlog_in(x, chi.degree)
    return unit_phase(np.asarray(j, dtype=np.int64) * chi.exponent, F.q**chi.degree - 1)


def mul_char_table(F, chi):
    """chi(g_d^j) for j = 0 .. q^d - 2."""
    modulus = F.q**chi.degree - 1
    j = np.arange(modulus, dtype=np.int64)
    return unit_phase(j * (chi.exponent % modulus), modulus)


def add_char_value(F, psi, x, r=1):
    """psi_r(x) = psi_b(Tr_{r/1}(x)) for x in F_{q^r}."""
    F.require_subfield(x, r)
    t = F.trace_to(x, r, 1)
    s = F.prime_trace(F.mul(psi.b, t))
    return unit_phase(s, F.p)


@lru_cache(maxsize=None)
def _psi_table(F, b, r):
    elems = F.subfield_elements(r)
    s = F.prime_trace(F.mul(b, F.trace_to(elems, r, 1)))
    table = unit_phase(np.asarray(s, dtype=np.int64), F.p)
    table = np.atleast_1d(table)
    table.setflags(write=False)
    return table


def psi_table(F, psi, r):
    """psi_r(g_r^j) for j = 0 .. q^r - 2."""
    F.check_degree(r)
    return _psi_table(F, psi.b, r)


# --- Frobenius orbits ---

def frobenius_orbit(q, d, k):
    modulus = q**d - 1
    k %= modulus
    orbit = {k}
    x = (k * q) % modulus
    while x not in orbit:
        orbit.add(x)
        x = (x * q) % modulus
    return tuple(sorted(orbit))


def orbit_degree(q, d, k):
    return len(frobenius_orbit(q, d, k))


def is_regular(q, d, k):
    return orbit_degree(q, d, k) == d


def char_inflate(q, chi, d):
    """chi o N_{d/d'} as a character of F_{q^d}^x."""
    if d % chi.degree:
        raise DegreeNotDividing(f"degree {chi.degree} does not divide {d}")
    factor = (q**d - 1) // (q**chi.degree - 1)
    return MulCharacter(d, (chi.exponent * factor) % (q**d - 1))


def char_descend(q, chi):
    """The character of its true orbit degree whose inflation is chi."""
    modulus = q**chi.degree - 1
    k = chi.exponent % modulus
    d = orbit_degree(q, chi.degree, k)
    factor = (q**chi.degree - 1) // (q**d - 1)
    return MulCharacter(d, k // factor)


def enumerate_char_tuples(mu, q):
    """All of Gamma_mu: prod_j (q^{m_j} - 1) tuples in lexicographic exponent order."""
    mu = tuple(mu)
    ranges = [range(q**m - 1) for m in mu]
    for exps in itertools.product(*ranges):
        yield CharTuple(mu, tuple(MulCharacter(m, k) for m, k in zip(mu, exps)))
