"""
The etale algebra F_lambda (x) F_{q^m} as a product of field powers.

Factor i is F_{q^{l_i}}^{d_i} with d_i = gcd(n_i, m), l_i = lcm(n_i, m).
An F_{q^m} scalar s acts on coordinate j of a factor through s^(q^-(j-1)),
which is why N_2 carries the Frobenius weights q^(j-1).

Unit-group sums work on dlog blocks: an int64 array with one column per
coordinate holding dlog exponents relative to g_{l_i}.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.config import CHUNK_SIZE
from src.errors import DegreeMismatch, ValidationError, ZeroArgument


@dataclass(frozen=True)
class EtaleFactor:
    n: int
    m: int

    @property
    def d(self):
        return math.gcd(self.n, self.m)

    @property
    def l(self):
        return math.lcm(self.n, self.m)


class EtaleTensorAlgebra:
    def __init__(self, F, lam, m):
        if m < 1 or not lam or any(n < 1 for n in lam):
            raise ValidationError(f"invalid etale data lambda={lam}, m={m}")
        self.F = F
        self.lam = tuple(lam)
        self.m = m
        self.factors = tuple(EtaleFactor(n, m) for n in self.lam)
        for f in self.factors:
            F.check_degree(f.l)
        F.check_degree(m)
        # (factor index, j, l) per coordinate, in component order
        self.coordinates = tuple(
            (i, j, f.l) for i, f in enumerate(self.factors) for j in range(f.d)
        )
        self.q = F.q

    @property
    def unit_count(self):
        return math.prod((self.q**f.l - 1) ** f.d for f in self.factors)

    @property
    def fiber_size(self):
        return self.unit_count // (self.q**self.m - 1)

    def _check_element(self, x):
        if len(x) != len(self.factors):
            raise DegreeMismatch(f"expected {len(self.factors)} factors, got {len(x)}")
        for f, xi in zip(self.factors, x):
            if len(xi) != f.d:
                raise DegreeMismatch(f"factor with d={f.d} given {len(xi)} coordinates")
            self.F.require_subfield(list(xi), f.l)

    # --- Norms and trace on elements ---

    def norm1(self, x):
        """(prod_j N_{l_i/n_i}(x_ij))_i."""
        self._check_element(x)
        F = self.F
        out = []
        for f, xi in zip(self.factors, x):
            acc = 1
            for xij in xi:
                acc = F.mul(acc, F.norm_to(xij, f.l, f.n))
            out.append(int(acc))
        return tuple(out)

    def norm2(self, x):
        """prod_i prod_j N_{l_i/m}(x_ij)^(q^(j-1))."""
        self._check_element(x)
        F = self.F
        acc = 1
        for f, xi in zip(self.factors, x):
            for j, xij in enumerate(xi):
                acc = F.mul(acc, F.frobenius(F.norm_to(xij, f.l, self.m), j))
        return int(acc)

    def abs_trace(self, x):
        self._check_element(x)
        F = self.F
        acc = 0
        for f, xi in zip(self.factors, x):
            for xij in xi:
                acc = F.add(acc, F.trace_to(xij, f.l, 1))
        return int(acc)

    def embed_pure_tensor(self, i, a, b):
        """Image of a (x) b in factor i: (a * b^(q^-(j-1)))_j, a in F_{q^{n_i}}, b in F_{q^m}."""
        f = self.factors[i]
        F = self.F
        F.require_subfield(a, f.n)
        F.require_subfield(b, self.m)
        # q^-(j-1) acts as q^(m - (j-1) mod m) on F_{q^m}
        return tuple(
            int(F.mul(a, F.frobenius(b, (-j) % self.m))) for j in range(f.d)
        )

    def element_from_exponents(self, row):
        """EtaleElement from one dlog row."""
        F = self.F
        out = [[] for _ in self.factors]
        for (i, _, l), e in zip(self.coordinates, row):
            out[i].append(int(F.from_dlog(int(e), l)))
        return tuple(tuple(c) for c in out)

    # --- Exponent-level maps on dlog blocks ---

    def norm1_exponents(self, block):
        """dlog_{n_i} of N_1 per factor: sum of the factor's exponents mod q^{n_i} - 1."""
        out = []
        col = 0
        for f in self.factors:
            modulus = self.q**f.n - 1
            out.append(block[:, col:col + f.d].sum(axis=1) % modulus)
            col += f.d
        return out

    def norm2_exponents(self, block):
        modulus = self.q**self.m - 1
        weights = np.asarray(
            [pow(self.q, j, modulus) if modulus > 1 else 0 for _, j, _ in self.coordinates],
            dtype=np.int64,
        )
        return (block % modulus * weights).sum(axis=1) % modulus

    # --- Enumeration ---

    def unit_exponent_blocks(self, chunk=CHUNK_SIZE):
        """All of A^x as dlog blocks, in row-major coordinate order."""
        shape = tuple(self.q**l - 1 for _, _, l in self.coordinates)
        total = self.unit_count
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            yield np.stack(np.unravel_index(idx, shape), axis=1).astype(np.int64)

    def fiber_exponent_blocks(self, a_exp, chunk=CHUNK_SIZE):
        """dlog blocks of {x : N_2(x) = g_m^a_exp}.

        The last coordinate is solved from the others and walks the coset of
        the norm kernel <g_l^(q^m - 1)>.
        """
        modulus = self.q**self.m - 1
        free = self.coordinates[:-1]
        *_, (_, j_last, l_last) = self.coordinates
        free_shape = tuple(self.q**l - 1 for _, _, l in free)
        free_total = math.prod(free_shape)
        kernel = (self.q**l_last - 1) // modulus
        w = pow(self.q, j_last, modulus) if modulus > 1 else 0
        w_inv = pow(w, -1, modulus) if modulus > 1 else 0
        weights = np.asarray(
            [pow(self.q, j, modulus) if modulus > 1 else 0 for _, j, _ in free],
            dtype=np.int64,
        )
        steps = np.arange(kernel, dtype=np.int64) * modulus
        rows_per_chunk = max(1, chunk // kernel)
        for start in range(0, free_total, rows_per_chunk):
            idx = np.arange(start, min(start + rows_per_chunk, free_total), dtype=np.int64)
            if free:
                head = np.stack(np.unravel_index(idx, free_shape), axis=1).astype(np.int64)
                s = (head % max(modulus, 1) * weights).sum(axis=1) % max(modulus, 1)
            else:
                head = np.zeros((len(idx), 0), dtype=np.int64)
                s = np.zeros(len(idx), dtype=np.int64)
            t = ((a_exp - s) % max(modulus, 1)) * w_inv % max(modulus, 1)
            last = (t[:, None] + steps[None, :]).reshape(-1)
            yield np.concatenate([np.repeat(head, kernel, axis=0), last[:, None]], axis=1)

    def norm2_fiber(self, a, chunk=CHUNK_SIZE):
        """Iterate EtaleElements x with N_2(x) = a."""
        if a == 0:
            raise ZeroArgument("norm fiber over zero")
        a_exp = self.F.dlog_in(a, self.m)
        for block in self.fiber_exponent_blocks(a_exp, chunk):
            for row in block:
                yield self.element_from_exponents(row)
