"""
Finite Field Tower
Arithmetic in one ambient field F_{q^N} that houses every subfield F_{q^d}, d | N.

Elements are integer codes: the coefficient vector over F_p read as base-p
digits, little-endian (code = sum c_i p^i). galois encodes FieldArray
elements the same way, so codes go straight into it. Multiplicative work
runs through dense exp/log tables; addition goes through galois.
"""

import sys
from dataclasses import dataclass
from pathlib import Path

import galois
import numpy as np

from src.config import DEFAULT_TABLE_CAP
from src.errors import (
    DegreeMismatch,
    DegreeNotDividing,
    InvalidPrime,
    TableCapExceeded,
    ValidationError,
    ZeroArgument,
)

MAGIC = b"BKL1"
HEADER_DTYPE = np.dtype("<u8")


@dataclass(frozen=True)
class PrimePower:
    p: int
    e: int = 1

    def __post_init__(self):
        if self.e < 1:
            raise ValidationError(f"exponent must be positive, got {self.e}")
        if not galois.is_prime(int(self.p)):
            raise InvalidPrime(f"{self.p} is not prime")

    @property
    def q(self):
        return self.p**self.e


def smallest_irreducible(p, degree):
    """Lexicographically smallest monic irreducible polynomial of `degree` over F_p."""
    if degree == 1:
        return galois.Poly([1, 0], field=galois.GF(p))
    return galois.irreducible_poly(p, degree, method="min")


def smallest_generator(GF):
    """Smallest code whose multiplicative order is |GF| - 1."""
    order = GF.order - 1
    primes = galois.factors(order)[0] if order > 1 else []
    for code in range(1, GF.order):
        x = GF(code)
        if all(x ** (order // r) != 1 for r in primes):
            return code
    raise ValidationError(f"no generator found in GF({GF.order})")


class AmbientField:
    """F_{q^N} with generator g and dense discrete-log tables.

    The same tables can be viewed over a larger base via rebase(); only
    (base, N) change, the modulus and generator are shared.
    """

    def __init__(self, base, N, GF, modulus, generator, exp_table, log_table):
        self.base = base
        self.N = N
        self.GF = GF
        self.modulus = modulus
        self.generator = generator
        self.exp = exp_table
        self.log = log_table
        self.order = base.q**N
        self.units = self.order - 1
        self._subfields = {}

    def __repr__(self):
        return f"AmbientField(p={self.p}, e={self.e}, N={self.N})"

    @property
    def p(self):
        return self.base.p

    @property
    def e(self):
        return self.base.e

    @property
    def q(self):
        return self.base.q

    @property
    def degree(self):
        """Degree e*N of the ambient field over F_p."""
        return self.base.e * self.N

    def descriptor(self):
        return {
            "p": self.p,
            "e": self.e,
            "N": self.N,
            "modulus": [int(c) for c in self.modulus.coeffs[::-1]],
        }

    def key(self):
        d = self.descriptor()
        return f"{d['p']}^{d['e']}:{d['N']}:" + ",".join(map(str, d["modulus"]))

    # --- Degrees and subfields ---

    def check_degree(self, d):
        if d < 1 or self.N % d:
            raise DegreeNotDividing(f"degree {d} does not divide N={self.N}")

    def check_tower(self, l, m):
        self.check_degree(l)
        if m < 1 or l % m:
            raise DegreeNotDividing(f"degree {m} does not divide {l}")

    def cofactor(self, d):
        """(q^N - 1)/(q^d - 1): g^cofactor generates F_{q^d}^x."""
        self.check_degree(d)
        return self.units // (self.q**d - 1)

    def subfield_generator(self, d):
        return int(self.exp[self.cofactor(d)])

    def subfield_elements(self, d):
        """F_{q^d}^x in dlog order g_d^0, g_d^1, ..."""
        if d not in self._subfields:
            idx = np.arange(self.q**d - 1, dtype=np.int64) * self.cofactor(d)
            self._subfields[d] = self.exp[idx]
        return self._subfields[d]

    def in_subfield(self, x, d):
        x = np.asarray(x, dtype=np.int64)
        return (x == 0) | (self.log[x] % self.cofactor(d) == 0)

    def require_subfield(self, x, d):
        if not np.all(self.in_subfield(x, d)):
            raise DegreeMismatch(f"element outside F_(q^{d})")

    # --- Multiplicative structure ---

    def dlog(self, x):
        arr = np.asarray(x, dtype=np.int64)
        if np.any(arr == 0):
            raise ZeroArgument("dlog of zero")
        out = self.log[arr]
        return int(out) if out.ndim == 0 else out

    def dlog_in(self, x, d):
        """Discrete log of x relative to g_d, for x in F_{q^d}^x."""
        self.require_subfield(x, d)
        out = np.asarray(self.dlog(x)) // self.cofactor(d)
        return int(out) if out.ndim == 0 else out

    def from_dlog(self, e, d=None):
        """g_d^e (g itself when d is None)."""
        step = 1 if d is None else self.cofactor(d)
        out = self.exp[(np.asarray(e, dtype=np.int64) * step) % self.units]
        return int(out) if out.ndim == 0 else out

    def _raise(self, x, r):
        """x^r for a reduced exponent r standing for a positive power; 0 stays 0."""
        arr = np.asarray(x, dtype=np.int64)
        out = np.where(arr == 0, 0, self.exp[(self.log[arr] * (r % self.units)) % self.units])
        return int(out) if out.ndim == 0 else out

    def mul(self, x, y):
        a = np.asarray(x, dtype=np.int64)
        b = np.asarray(y, dtype=np.int64)
        s = (self.log[a] + self.log[b]) % self.units
        out = np.where((a == 0) | (b == 0), 0, self.exp[s])
        return int(out) if out.ndim == 0 else out

    def inv(self, x):
        arr = np.asarray(x, dtype=np.int64)
        if np.any(arr == 0):
            raise ZeroArgument("inverse of zero")
        out = self.exp[(-self.log[arr]) % self.units]
        return int(out) if out.ndim == 0 else out

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def power(self, x, k):
        arr = np.asarray(x, dtype=np.int64)
        if k == 0:
            out = np.ones_like(arr)
            return int(out) if out.ndim == 0 else out
        if k < 0:
            return self._raise(self.inv(arr), -k)
        return self._raise(arr, k % self.units if self.units > 1 else 0)

    def frobenius(self, x, j=1):
        """x^(q^j)."""
        return self._raise(x, pow(self.q, j, self.units) if self.units > 1 else 0)

    # --- Additive structure ---

    def _codes(self, arr):
        out = np.asarray(arr.view(np.ndarray), dtype=np.int64)
        return int(out) if out.ndim == 0 else out

    def add(self, x, y):
        return self._codes(self.GF(np.asarray(x, dtype=np.int64)) + self.GF(np.asarray(y, dtype=np.int64)))

    def sub(self, x, y):
        return self._codes(self.GF(np.asarray(x, dtype=np.int64)) - self.GF(np.asarray(y, dtype=np.int64)))

    def neg(self, x):
        return self._codes(-self.GF(np.asarray(x, dtype=np.int64)))

    def coeffs(self, x):
        """Little-endian coefficient vector of length e*N."""
        if self.degree == 1:
            return [int(x)]
        return [int(c) for c in self.GF(int(x)).vector()[::-1]]

    def from_coeffs(self, coeffs):
        coeffs = [int(c) % self.p for c in coeffs]
        if len(coeffs) != self.degree:
            raise DegreeMismatch(f"expected {self.degree} coefficients, got {len(coeffs)}")
        if self.degree == 1:
            return coeffs[0]
        return int(self.GF.Vector(coeffs[::-1]))

    # --- Norms and traces ---

    def norm_to(self, x, l, m):
        """N_{l/m}(x) = prod_i x^(q^(m i)) = x^((q^l - 1)/(q^m - 1))."""
        self.check_tower(l, m)
        self.require_subfield(x, l)
        return self._raise(x, (self.q**l - 1) // (self.q**m - 1))

    def trace_to(self, x, l, m):
        """Tr_{l/m}(x) = sum_i x^(q^(m i))."""
        self.check_tower(l, m)
        self.require_subfield(x, l)
        arr = np.asarray(x, dtype=np.int64)
        total = self.GF(arr)
        for i in range(1, l // m):
            total = total + self.GF(np.asarray(self.frobenius(arr, m * i), dtype=np.int64))
        return self._codes(total)

    def prime_trace(self, x, l=1):
        """Tr from F_{q^l} down to F_p; the result code is its integer value in [0, p)."""
        self.check_degree(l)
        arr = np.asarray(x, dtype=np.int64)
        total = self.GF(arr)
        for i in range(1, self.e * l):
            r = pow(self.p, i, self.units) if self.units > 1 else 0
            total = total + self.GF(np.asarray(self._raise(arr, r), dtype=np.int64))
        return self._codes(total)

    # --- Views ---

    def rebase(self, k):
        """The same field seen over F_{q^k}: base p^(e k), degree N/k."""
        self.check_degree(k)
        return AmbientField(
            PrimePower(self.p, self.e * k), self.N // k, self.GF,
            self.modulus, self.generator, self.exp, self.log,
        )

    def prime_field_element(self, value):
        """Embed an integer of F_p as a field code."""
        return int(value) % self.p


# --- Table construction and cache file ---

def _build_tables(GF, generator, units):
    seq = GF(np.full(units, generator, dtype=np.int64))
    seq[0] = 1
    exp_table = np.asarray(np.multiply.accumulate(seq).view(np.ndarray), dtype=np.int64)
    log_table = np.full(units + 1, -1, dtype=np.int64)
    log_table[exp_table] = np.arange(units, dtype=np.int64)
    return exp_table, log_table


def _tables_from_log(log_entries, units):
    log_table = np.full(units + 1, -1, dtype=np.int64)
    log_table[1:] = log_entries
    exp_table = np.empty(units, dtype=np.int64)
    exp_table[log_entries] = np.arange(1, units + 1, dtype=np.int64)
    return exp_table, log_table


def _header(F):
    modulus = F.descriptor()["modulus"]
    generator = F.coeffs(F.generator)
    return np.asarray([F.p, F.e, F.N, *modulus, *generator], dtype=HEADER_DTYPE)


def cache_path(cache_dir, base, N):
    return Path(cache_dir) / f"dlog_p{base.p}_e{base.e}_N{N}.bkl"


def save_dlog_cache(F, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_header(F).tobytes())
        f.write(F.log[1:].astype(HEADER_DTYPE).tobytes())


def load_dlog_cache(F, path):
    """Log entries for codes 1..q^N-1 if the file matches F, else None."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        raw = path.read_bytes()
        header = _header(F)
        hlen = len(MAGIC) + header.nbytes
        if raw[:len(MAGIC)] != MAGIC:
            raise ValueError("bad magic")
        stored = np.frombuffer(raw[len(MAGIC):hlen], dtype=HEADER_DTYPE)
        if stored.shape != header.shape or not np.array_equal(stored, header):
            raise ValueError("header mismatch")
        entries = np.frombuffer(raw[hlen:], dtype=HEADER_DTYPE).astype(np.int64)
        if entries.shape != (F.units,):
            raise ValueError("truncated table")
        return entries
    except ValueError as e:
        print(f"Warning: ignoring dlog cache {path}: {e}", file=sys.stderr)
        return None


def build_ambient(base, N, cap=DEFAULT_TABLE_CAP, cache_dir=None):
    """Build F_{q^N} with deterministic modulus and generator."""
    if N < 1:
        raise ValidationError(f"ambient degree must be positive, got {N}")
    units = base.q**N - 1
    if units > cap:
        raise TableCapExceeded(f"q^N - 1 = {units} exceeds table cap {cap}")

    degree = base.e * N
    modulus = smallest_irreducible(base.p, degree)
    if degree == 1:
        GF = galois.GF(base.p)
    else:
        GF = galois.GF(base.p**degree, irreducible_poly=modulus)
    generator = smallest_generator(GF)

    # Shell first so the header can be computed before the tables exist
    F = AmbientField(base, N, GF, modulus, generator, None, None)
    path = cache_path(cache_dir, base, N) if cache_dir else None
    entries = load_dlog_cache(F, path) if path else None
    if entries is not None:
        F.exp, F.log = _tables_from_log(entries, units)
        print(f"✓ Loaded dlog table from {path}", file=sys.stderr)
    else:
        F.exp, F.log = _build_tables(GF, generator, units)
        if path:
            save_dlog_cache(F, path)
    return F
