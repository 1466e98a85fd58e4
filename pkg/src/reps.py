"""
Parameter calculus for the generic representations Pi_lambda(alpha) of GL_n(F_q).

A representation is named by a composition lambda of n and characters
alpha_j of F_{q^{n_j}}^x. Its isomorphism class is the multiset of
Frobenius orbits of the alpha_j, each counted n_j/d times at its true
orbit degree d: that multiset is the CanonicalRepForm.
"""

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

from src.characters import (
    CharTuple,
    MulCharacter,
    char_descend,
    enumerate_char_tuples,
    frobenius_orbit,
    mul_char_value,
)
from src.errors import InvalidSupportPoint, ValidationError, ZeroArgument
from src.symfun import partitions_of, phi_mu, z_mu


@dataclass(frozen=True)
class GenericRepParams:
    q: int
    lam: tuple
    alpha: CharTuple

    def __post_init__(self):
        if self.q < 2:
            raise ValidationError(f"q must be at least 2, got {self.q}")
        if tuple(self.lam) != tuple(self.alpha.mu):
            raise ValidationError(f"character degrees {self.alpha.mu} do not match {self.lam}")
        if not self.lam or any(n < 1 for n in self.lam):
            raise ValidationError(f"invalid composition {self.lam}")

    @classmethod
    def from_exponents(cls, q, lam, exponents):
        lam = tuple(lam)
        exponents = tuple(exponents)
        if len(lam) != len(exponents):
            raise ValidationError(f"{len(exponents)} exponents for {len(lam)} parts")
        chars = tuple(MulCharacter(n, k % (q**n - 1)) for n, k in zip(lam, exponents))
        return cls(q, lam, CharTuple(lam, chars))

    @property
    def n(self):
        return sum(self.lam)

    @property
    def r(self):
        return len(self.lam)

    def to_json(self):
        return {"q": self.q, "lambda": list(self.lam), "alpha": self.alpha.to_json()}


@dataclass(frozen=True, order=True)
class OrbitBlock:
    degree: int
    representative: int
    multiplicity: int


@dataclass(frozen=True)
class CanonicalRepForm:
    q: int
    blocks: tuple

    @property
    def n(self):
        return sum(b.degree * b.multiplicity for b in self.blocks)

    def key(self):
        return f"{self.q}:" + ";".join(
            f"{b.degree},{b.representative},{b.multiplicity}" for b in self.blocks
        )

    def to_json(self):
        return [
            {"degree": b.degree, "representative": b.representative, "multiplicity": b.multiplicity}
            for b in self.blocks
        ]


@dataclass(frozen=True)
class SupportPoint:
    """g_{n_1..n_s}(c_1..c_s): c_1 I_{n_1} in the top-right corner, blocks anti-diagonal."""

    blocks: tuple
    scalars: tuple

    @property
    def n(self):
        return sum(self.blocks)

    def key(self):
        return ",".join(map(str, self.blocks)) + "|" + ",".join(map(str, self.scalars))

    def to_json(self):
        return {"blocks": list(self.blocks), "scalars": list(self.scalars)}


# --- Canonical forms ---

def canonicalize(P):
    mult = Counter()
    for chi in P.alpha.chars:
        base = char_descend(P.q, chi)
        rep = frobenius_orbit(P.q, base.degree, base.exponent)[0]
        mult[(base.degree, rep)] += chi.degree // base.degree
    blocks = tuple(OrbitBlock(d, rep, s) for (d, rep), s in sorted(mult.items()))
    return CanonicalRepForm(P.q, blocks)


def is_isomorphic(P1, P2):
    return P1.q == P2.q and canonicalize(P1) == canonicalize(P2)


def params_from_form(form):
    """A parameter tuple realizing the class: s copies of (d, rep) per block, longest parts first."""
    entries = sorted(
        ((b.degree, b.representative) for b in form.blocks for _ in range(b.multiplicity)),
        key=lambda t: (-t[0], t[1]),
    )
    lam = tuple(d for d, _ in entries)
    return GenericRepParams.from_exponents(form.q, lam, [k for _, k in entries])


def is_cuspidal(form):
    return len(form.blocks) == 1 and form.blocks[0].multiplicity == 1


def contragredient(P):
    return GenericRepParams(P.q, P.lam, P.alpha.inverse(P.q))


def char_tuple_params(q, beta):
    return GenericRepParams(q, beta.mu, beta)


# --- Invariants ---

def central_character(F, P, z):
    """omega(z) = prod_i alpha_i(z) for z in F_q^x."""
    if F.q != P.q:
        raise ValidationError(f"field over q={F.q} used for a representation over q={P.q}")
    if z == 0:
        raise ZeroArgument("central character at zero")
    F.require_subfield(z, 1)
    out = 1 + 0j
    for chi in P.alpha.chars:
        out *= mul_char_value(F, chi, z)
    return out


def central_exponent(P):
    """omega as a character of F_q^x: exponent sum_i k_i mod q - 1."""
    return sum(chi.exponent for chi in P.alpha.chars) % (P.q - 1)


def group_index(n, q):
    """[GL_n : U_n] = prod_{j=1}^n (q^j - 1)."""
    return math.prod(q**j - 1 for j in range(1, n + 1))


def group_order(n, q):
    return q ** (n * (n - 1) // 2) * group_index(n, q)


def _dimension_fraction(form):
    value = Fraction(group_index(form.n, form.q))
    for b in form.blocks:
        d, s = b.degree, b.multiplicity
        value *= Fraction(form.q ** (d * s * (s - 1) // 2), math.prod(form.q ** (d * j) - 1 for j in range(1, s + 1)))
    return value


def dimension(P):
    form = P if isinstance(P, CanonicalRepForm) else canonicalize(P)
    value = _dimension_fraction(form)
    if value.denominator != 1:
        raise ValidationError(f"dimension formula did not clear: {value}")
    return value.numerator


# --- Enumeration ---

def regular_orbits(q, d):
    """Minimal representatives of the Frobenius orbits of size d on F_{q^d}^x characters."""
    out = []
    for k in range(q**d - 1):
        orbit = frobenius_orbit(q, d, k)
        if len(orbit) == d and orbit[0] == k:
            out.append(k)
    return out


def enumerate_generic(n, q):
    """All generic classes of GL_n(F_q) as canonical forms, sorted by key."""
    candidates = [(d, k) for d in range(1, n + 1) for k in regular_orbits(q, d)]
    forms = []

    def extend(start, remaining, chosen):
        if remaining == 0:
            blocks = tuple(OrbitBlock(d, k, s) for (d, k), s in chosen)
            forms.append(CanonicalRepForm(q, blocks))
            return
        for idx in range(start, len(candidates)):
            d, k = candidates[idx]
            for s in range(1, remaining // d + 1):
                extend(idx + 1, remaining - d * s, chosen + [((d, k), s)])

    extend(0, n, [])
    return sorted(forms, key=lambda f: f.blocks)


def counting_identity(m, q):
    """Per class sigma of GL_m: (sum_mu #{beta : Pi_mu(beta) = sigma}/(Z_mu phi_mu), dim sigma/[GL_m:U_m])."""
    lhs = defaultdict(Fraction)
    for mu in partitions_of(m):
        weight = Fraction(1, z_mu(mu) * phi_mu(mu, q))
        for beta in enumerate_char_tuples(mu, q):
            lhs[canonicalize(char_tuple_params(q, beta))] += weight
    index = group_index(m, q)
    return {
        form: (lhs[form], _dimension_fraction(form) / index)
        for form in enumerate_generic(m, q)
    }


def _eta(form, q, beta):
    """(nu_i, gamma_i) per orbit block: parts m_j/d_i and reduced characters in the orbit."""
    reduced = [char_descend(q, chi) for chi in beta.chars]
    datum = []
    for b in form.blocks:
        orbit = frobenius_orbit(q, b.degree, b.representative)
        hits = [
            j for j, chi in enumerate(reduced)
            if chi.degree == b.degree and chi.exponent in orbit
        ]
        nu = tuple(beta.mu[j] // b.degree for j in hits)
        gamma = tuple(reduced[j].exponent for j in hits)
        datum.append((nu, gamma))
    return tuple(datum)


@dataclass
class PreimageCensus:
    observed: dict
    expected: dict
    omega_size: int

    @property
    def consistent(self):
        return (
            len(self.observed) == self.omega_size
            and all(self.observed.get(k) == v for k, v in self.expected.items())
        )


def preimage_census(form, q):
    """Preimage counts of the orbit-labelling map against Z_mu/prod(d_i^l(nu_i) Z_nu_i)."""
    observed = Counter()
    for mu in partitions_of(form.n):
        for beta in enumerate_char_tuples(mu, q):
            if canonicalize(char_tuple_params(q, beta)) == form:
                observed[_eta(form, q, beta)] += 1
    expected = {}
    for datum in observed:
        mu = tuple(sorted((b.degree * s for b, (nu, _) in zip(form.blocks, datum) for s in nu), reverse=True))
        denom = math.prod(b.degree ** len(nu) * z_mu(nu) for b, (nu, _) in zip(form.blocks, datum))
        expected[datum] = Fraction(z_mu(mu), denom)
    omega_size = math.prod(
        sum(b.degree ** len(nu) for nu in partitions_of(b.multiplicity)) for b in form.blocks
    )
    return PreimageCensus(dict(observed), expected, omega_size)


# --- Shintani base change ---

def shintani_base_change(P, k):
    """Parameters over F_{q^k}: each (n_j, alpha_j) becomes gcd(n_j, k) parts of size n_j/gcd
    carrying alpha_j^(q^(i-1)) o N_{lcm/n_j}."""
    if k < 1:
        raise ValidationError(f"base change degree must be positive, got {k}")
    q = P.q
    lam, chars = [], []
    for n_j, chi in zip(P.lam, P.alpha.chars):
        g = math.gcd(n_j, k)
        L = math.lcm(n_j, k)
        modulus = q**L - 1
        factor = (q**L - 1) // (q**n_j - 1)
        for i in range(g):
            lam.append(L // k)
            chars.append(MulCharacter(L // k, (chi.exponent * pow(q, i, modulus) * factor) % modulus))
    lam = tuple(lam)
    return GenericRepParams(q**k, lam, CharTuple(lam, tuple(chars)))


# --- Support points ---

def validate_support_point(F, pt, n):
    if len(pt.blocks) != len(pt.scalars) or not pt.blocks:
        raise InvalidSupportPoint(f"malformed support point {pt}")
    if any(b < 1 for b in pt.blocks) or sum(pt.blocks) != n:
        raise InvalidSupportPoint(f"blocks {pt.blocks} are not a composition of {n}")
    if any(c == 0 for c in pt.scalars):
        raise InvalidSupportPoint(f"zero scalar in {pt.scalars}")
    if not all(F.in_subfield(list(pt.scalars), 1)):
        raise InvalidSupportPoint(f"scalars {pt.scalars} are not in F_q")


def enumerate_support_points(F, n):
    """All support points of GL_n(F_q); sequences (a_1..a_n) with a_1 != 0, where a nonzero
    entry opens a block with that scalar."""
    units = [int(x) for x in F.subfield_elements(1)]
    points = []
    for seq in itertools.product(units, *([[0] + units] * (n - 1))):
        blocks, scalars = [], []
        for a in seq:
            if a:
                blocks.append(1)
                scalars.append(a)
            else:
                blocks[-1] += 1
        points.append(SupportPoint(tuple(blocks), tuple(scalars)))
    return points


def identity_point(n):
    return SupportPoint((n,), (1,))


def invert_support_point(F, pt):
    """g_{n_1..n_s}(c)^-1 = g_{n_s..n_1}(c_s^-1..c_1^-1)."""
    return SupportPoint(
        tuple(reversed(pt.blocks)),
        tuple(int(F.inv(c)) for c in reversed(pt.scalars)),
    )


def scale_support_point(F, pt, z):
    return SupportPoint(pt.blocks, tuple(int(F.mul(z, c)) for c in pt.scalars))
