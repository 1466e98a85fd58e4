"""
Brute-force Bessel functions from the Gelfand-Graev Hecke algebra.

GL_n(F_q) is enumerated outright. The bi-(U, psi)-equivariant functions
have one basis element per support point g, spread over U g U by
f(u1 g u2) = psi(u1) psi(u2). Convolution

    (f * h)(g) = 1/|U| sum_x f(x) h(x^-1 g)

makes them a commutative algebra whose common eigenvectors, normalized to 1
at the identity, are the Bessel functions. The eigenvectors come from
the group alone; bessel_full_support enters only when they are matched
to generic classes.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from src.characters import psi_table
from src.config import (
    CHUNK_SIZE,
    DEFAULT_SEED,
    DIAGONALIZATION_DRAWS,
    MATCH_GAP,
    MATCH_TOL,
    MAX_GROUP_ORDER,
)
from src.errors import AmbiguousMatch, CheckFailed, DiagonalizationDegenerate, SizeCapExceeded
from src.gamma_bessel import bessel_full_support
from src.reps import (
    enumerate_generic,
    enumerate_support_points,
    group_order,
    identity_point,
    invert_support_point,
    params_from_form,
)

COMMUTATOR_TOL = 1e-9


@dataclass
class FqArithmetic:
    """F_q by index: 0 is zero, 1 + j is g_1^j for the ambient F_q generator g_1."""

    q: int
    codes: np.ndarray
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray

    @classmethod
    def from_field(cls, F):
        q = F.q
        codes = np.zeros(q, dtype=np.int64)
        codes[1:] = F.subfield_elements(1)
        arith = cls(q, codes, None, None, None)
        a, b = np.meshgrid(codes, codes, indexing="ij")
        arith.add = arith.index_of(F.add(a, b))
        arith.neg = arith.index_of(F.neg(codes))
        i, j = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
        arith.mul = np.where((i == 0) | (j == 0), 0, 1 + (i + j - 2) % max(q - 1, 1))
        return arith

    def index_of(self, code):
        order = np.argsort(self.codes)
        code = np.asarray(code, dtype=np.int64)
        pos = np.searchsorted(self.codes[order], code)
        return order[pos]


# --- Batched matrices over F_q (int arrays of shape (k, n, n)) ---

def _identity(n, k=1):
    out = np.zeros((k, n, n), dtype=np.int64)
    out[:, range(n), range(n)] = 1
    return out


def _matmul(ar, A, B):
    k = max(len(A), len(B))
    n = A.shape[1]
    A = np.broadcast_to(A, (k, n, n))
    B = np.broadcast_to(B, (k, n, n))
    out = np.zeros((k, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            acc = np.zeros(k, dtype=np.int64)
            for t in range(n):
                acc = ar.add[acc, ar.mul[A[:, i, t], B[:, t, j]]]
            out[:, i, j] = acc
    return out


def _det(ar, A):
    """Leibniz expansion over all permutations."""
    k, n, _ = A.shape
    total = np.zeros(k, dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        term = np.ones(k, dtype=np.int64)
        for i, j in enumerate(perm):
            term = ar.mul[term, A[:, i, j]]
        inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        total = ar.add[total, ar.neg[term] if inversions % 2 else term]
    return total


def _encode(q, A):
    k, n, _ = A.shape
    weights = np.asarray([q**i for i in range(n * n)], dtype=np.int64)
    return A.reshape(k, n * n) @ weights


def _decode(q, n, codes):
    codes = np.asarray(codes, dtype=np.int64)
    digits = (codes[:, None] // np.asarray([q**i for i in range(n * n)], dtype=np.int64)) % q
    return digits.reshape(len(codes), n, n)


@dataclass
class GroupTable:
    n: int
    F: object
    arith: FqArithmetic
    codes: np.ndarray
    unipotent: np.ndarray
    unipotent_inv: np.ndarray

    @property
    def q(self):
        return self.arith.q

    @property
    def order(self):
        return len(self.codes)

    def lookup(self, codes):
        """Group indices of encoded matrices; CheckFailed if any is not in the table."""
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        if not np.array_equal(self.codes[pos], codes):
            raise CheckFailed("product left the group table")
        return pos

    def matrices(self, idx):
        return _decode(self.q, self.n, self.codes[idx])

    def psi_on_unipotent(self, psi):
        """psi(u) = psi(sum of superdiagonal entries) for every u in U."""
        ar = self.arith
        psi_values = np.concatenate([[1 + 0j], psi_table(self.F, psi, 1)])
        acc = np.zeros(len(self.unipotent), dtype=np.int64)
        for i in range(self.n - 1):
            acc = ar.add[acc, self.unipotent[:, i, i + 1]]
        return psi_values[acc]

    def support_matrix(self, pt):
        """g_{n_1..n_s}(c_1..c_s): block i carries c_i I_{n_i}, the first in the top-right corner."""
        n = self.n
        out = np.zeros((1, n, n), dtype=np.int64)
        scalars = self.arith.index_of(list(pt.scalars))
        row = 0
        right = n
        for size, c in zip(pt.blocks, scalars):
            left = right - size
            for t in range(size):
                out[0, row + t, left + t] = c
            row += size
            right = left
        return out


def _unipotent_group(ar, n):
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    count = ar.q ** len(positions)
    out = _identity(n, count)
    if positions:
        digits = np.stack(np.unravel_index(np.arange(count), (ar.q,) * len(positions)), axis=1)
        for col, (i, j) in enumerate(positions):
            out[:, i, j] = digits[:, col]
    return out


def _unipotent_inverse(ar, U):
    """(I + N)^-1 = sum_k (-N)^k; N is nilpotent of order n."""
    k, n, _ = U.shape
    minus_n = ar.neg[U.copy()]
    minus_n[:, range(n), range(n)] = 0
    term = _identity(n, k)
    total = term
    for _ in range(n - 1):
        term = _matmul(ar, term, minus_n)
        total = ar.add[total, term]
    return total


def build_group(F, n):
    """All of GL_n(F_q), sorted by matrix code."""
    q = F.q
    expected = group_order(n, q)
    if expected > MAX_GROUP_ORDER:
        raise SizeCapExceeded(f"|GL_{n}(F_{q})| = {expected} exceeds {MAX_GROUP_ORDER}")
    ar = FqArithmetic.from_field(F)
    found = []
    total = q ** (n * n)
    for start in range(0, total, CHUNK_SIZE):
        codes = np.arange(start, min(start + CHUNK_SIZE, total), dtype=np.int64)
        det = _det(ar, _decode(q, n, codes))
        found.append(codes[det != 0])
    codes = np.concatenate(found)
    if len(codes) != expected:
        raise CheckFailed(f"enumerated {len(codes)} elements, expected {expected}")
    U = _unipotent_group(ar, n)
    G = GroupTable(n, F, ar, codes, U, _unipotent_inverse(ar, U))
    # closure on a sample: U and its inverses land back on the identity
    if not np.all(_encode(q, _matmul(ar, U, G.unipotent_inv)) == _encode(q, _identity(n))):
        raise CheckFailed("unipotent inverses are wrong")
    return G


# --- Double cosets and the algebra ---

@dataclass
class SupportCoset:
    point: object
    members: np.ndarray
    values: np.ndarray
    inverses: np.ndarray


def support_cosets(G, psi):
    """U g U for every support point g, with the psi-spread values and member inverses."""
    ar, q, n = G.arith, G.q, G.n
    points = enumerate_support_points(G.F, n)
    if len(points) != q**n - q ** (n - 1):
        raise CheckFailed(f"{len(points)} support points for GL_{n}(F_{q})")
    psi_u = G.psi_on_unipotent(psi)
    size = len(G.unipotent)
    u1 = np.repeat(np.arange(size), size)
    u2 = np.tile(np.arange(size), size)
    owner = np.full(G.order, -1, dtype=np.int64)
    cosets = []
    for index, pt in enumerate(points):
        g = G.support_matrix(pt)
        g_inv = G.support_matrix(invert_support_point(G.F, pt))
        if _encode(q, _matmul(ar, g, g_inv))[0] != _encode(q, _identity(n))[0]:
            raise CheckFailed(f"support point {pt.key()} and its inverse do not cancel")
        X = _matmul(ar, _matmul(ar, G.unipotent[u1], g), G.unipotent[u2])
        X_inv = _matmul(ar, _matmul(ar, G.unipotent_inv[u2], g_inv), G.unipotent_inv[u1])
        values = psi_u[u1] * psi_u[u2]
        codes, first, back = np.unique(_encode(q, X), return_index=True, return_inverse=True)
        if np.max(np.abs(values - values[first][back.reshape(-1)])) > COMMUTATOR_TOL:
            raise CheckFailed(f"psi-spread is inconsistent on the coset of {pt.key()}")
        members = G.lookup(codes)
        if np.any(owner[members] >= 0):
            raise CheckFailed(f"coset of {pt.key()} meets an earlier coset")
        owner[members] = index
        cosets.append(SupportCoset(pt, members, values[first], X_inv[first]))
    return cosets


@dataclass
class HeckeAlgebra:
    G: GroupTable
    cosets: list
    structure: np.ndarray
    unit_index: int

    @property
    def points(self):
        return [c.point for c in self.cosets]

    def left_matrix(self, a):
        """Matrix of h -> f_a * h in the coset basis."""
        return self.structure[a].T

    def convolve(self, x, y):
        return np.einsum("a,b,abc->c", np.asarray(x), np.asarray(y), self.structure)

    def commutator_defect(self):
        return float(np.max(np.abs(self.structure - self.structure.transpose(1, 0, 2))))


def build_hecke_algebra(G, psi):
    """Structure constants S[a, b, c] = (f_a * f_b)(g_c)."""
    cosets = support_cosets(G, psi)
    s = len(cosets)
    owner = np.full(G.order, -1, dtype=np.int64)
    value = np.zeros(G.order, dtype=complex)
    for index, coset in enumerate(cosets):
        owner[coset.members] = index
        value[coset.members] = coset.values
    S = np.zeros((s, s, s), dtype=complex)
    for a, ca in enumerate(cosets):
        for c, cc in enumerate(cosets):
            g_c = G.support_matrix(cc.point)
            idx = G.lookup(_encode(G.q, _matmul(G.arith, ca.inverses, g_c)))
            b = owner[idx]
            hit = b >= 0
            np.add.at(S, (a, b[hit], c), ca.values[hit] * value[idx[hit]])
    S /= len(G.unipotent)
    unit = [c.point for c in cosets].index(identity_point(G.n))
    return HeckeAlgebra(G, cosets, S, unit)


@dataclass
class EquivariantFunction:
    points: list
    values: np.ndarray
    eigenvalue: complex = 0j

    def value_at(self, pt):
        return complex(self.values[self.points.index(pt)])

    def to_json(self):
        return [
            {"point": pt.to_json(), "re": float(v.real), "im": float(v.imag)}
            for pt, v in zip(self.points, self.values)
        ]


def bessel_functions_numeric(algebra, seed=DEFAULT_SEED):
    """Common eigenvectors of the algebra, each normalized to 1 at the identity."""
    s = len(algebra.cosets)
    rng = np.random.default_rng(seed)
    lefts = [algebra.left_matrix(a) for a in range(s)]
    scale = max(1.0, max(float(np.max(np.abs(L))) for L in lefts))
    for _ in range(DIAGONALIZATION_DRAWS):
        weights = rng.normal(size=s) + 1j * rng.normal(size=s)
        M = sum(w * L for w, L in zip(weights, lefts))
        eigenvalues, vectors = np.linalg.eig(M)
        gaps = np.abs(eigenvalues[:, None] - eigenvalues[None, :])
        np.fill_diagonal(gaps, np.inf)
        if s > 1 and np.min(gaps) < 1e-8 * scale:
            continue
        pivots = vectors[algebra.unit_index]
        if np.min(np.abs(pivots)) < 1e-12:
            continue
        vectors = vectors / pivots
        residual = max(
            float(np.max(np.abs(L @ vectors - vectors * (L @ vectors)[algebra.unit_index])))
            for L in lefts
        )
        if residual > 1e-8 * scale:
            continue
        points = algebra.points
        return [
            EquivariantFunction(points, vectors[:, i], complex(eigenvalues[i]))
            for i in range(s)
        ]
    raise DiagonalizationDegenerate(f"no separating element after {DIAGONALIZATION_DRAWS} draws")


# --- Matching against the formula route ---

@dataclass
class OracleMatch:
    form: object
    function: int
    distance: float
    runner_up: float


def match_oracle_to_params(F, functions, n, psi, memo=None, tol=MATCH_TOL, gap=MATCH_GAP):
    """Pair every generic class with the oracle function nearest to its bessel_full_support values."""
    points = functions[0].points
    scalar = [i for i, pt in enumerate(points) if len(pt.blocks) == 1]
    oracle = np.asarray([f.values for f in functions])
    matches = []
    claimed = {}
    for form in enumerate_generic(n, F.q):
        P = params_from_form(form)
        expected = np.asarray([bessel_full_support(F, P, pt, psi, memo) for pt in points])
        distance = np.max(np.abs(oracle - expected), axis=1)
        # central character first: values at the scalar points (n),(z)
        central = np.max(np.abs(oracle[:, scalar] - expected[scalar]), axis=1) <= gap
        candidates = np.flatnonzero(central)
        if not len(candidates):
            raise AmbiguousMatch(f"no oracle function has the central character of {form.key()}")
        best = int(candidates[np.argmin(distance[candidates])])
        others = np.delete(distance, best)
        runner_up = float(others.min()) if len(others) else float("inf")
        if distance[best] >= tol or runner_up <= gap:
            raise AmbiguousMatch(
                f"{form.key()}: best distance {distance[best]:.3e}, runner-up {runner_up:.3e}"
            )
        if best in claimed:
            raise AmbiguousMatch(f"{form.key()} and {claimed[best]} share oracle function {best}")
        claimed[best] = form.key()
        matches.append(OracleMatch(form, best, float(distance[best]), runner_up))
    if len(matches) != len(functions):
        raise AmbiguousMatch(f"{len(matches)} classes for {len(functions)} oracle functions")
    return matches


@dataclass
class HeckeReport:
    n: int
    q: int
    group_order: int
    support_size: int
    commutator_defect: float
    matches: list = field(default_factory=list)

    @property
    def max_deviation(self):
        return max((m.distance for m in self.matches), default=0.0)

    @property
    def passed(self):
        return self.commutator_defect <= COMMUTATOR_TOL and self.max_deviation < MATCH_TOL

    def to_json(self):
        return {
            "n": self.n,
            "q": self.q,
            "group_order": self.group_order,
            "support_points": self.support_size,
            "commutator_defect": self.commutator_defect,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
            "matches": [
                {"class": m.form.key(), "function": m.function,
                 "distance": m.distance, "runner_up": m.runner_up}
                for m in self.matches
            ],
        }


def hecke_check(F, n, psi, seed=DEFAULT_SEED, memo=None):
    """Build the oracle for GL_n(F_q), diagonalize it and match every class."""
    G = build_group(F, n)
    algebra = build_hecke_algebra(G, psi)
    defect = algebra.commutator_defect()
    if defect > COMMUTATOR_TOL:
        raise CheckFailed(f"Hecke algebra is not commutative: defect {defect:.3e}")
    functions = bessel_functions_numeric(algebra, seed)
    matches = match_oracle_to_params(F, functions, n, psi, memo)
    return HeckeReport(n, F.q, G.order, len(algebra.cosets), defect, matches)
