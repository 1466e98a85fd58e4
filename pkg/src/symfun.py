"""
Partitions, Newton identities, Dickson polynomials and polynomial roots.

Sign conventions (one helper each, nowhere re-derived inline):
  elementary e_m:  prod_i (1 + w_i T) = sum_m e_m T^m = exp(-sum_m p_m (-T)^m / m)
  complete  h_m:   prod_i (1 - w_i T)^-1 = sum_m h_m T^m = exp(sum_m p_m T^m / m)
so prod_i (1 - w_i X) has coefficients (-1)^m e_m, and
prod_i (X - w_i) = sum_m (-1)^m e_m X^(n-m).
"""

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.config import DEFAULT_SEED, ROOT_TOL
from src.errors import DegenerateLeading, ValidationError

MAX_ITERATIONS = 500
RESTARTS = 3


# --- Partitions ---

@lru_cache(maxsize=None)
def partitions_of(m, largest=None):
    """Partitions of m as descending tuples, reverse-lexicographic order."""
    if m < 0:
        raise ValidationError(f"cannot partition {m}")
    if m == 0:
        return ((),)
    largest = m if largest is None else min(largest, m)
    out = []
    for first in range(largest, 0, -1):
        for rest in partitions_of(m - first, first):
            out.append((first, *rest))
    return tuple(out)


def z_mu(mu):
    """Z_mu = prod_k k^{mu(k)} mu(k)!."""
    return math.prod(k**c * math.factorial(c) for k, c in Counter(mu).items())


def phi_mu(mu, q):
    return math.prod(q**m - 1 for m in mu)


# --- Newton identities ---

def newton_e_from_p(p):
    """e_0..e_M from p_1..p_M via m e_m = sum_{i=1}^m (-1)^(i-1) e_{m-i} p_i."""
    e = [1 + 0j]
    for m in range(1, len(p) + 1):
        acc = sum((-1) ** (i - 1) * e[m - i] * p[i - 1] for i in range(1, m + 1))
        e.append(acc / m)
    return e


def newton_h_from_p(p):
    """h_0..h_M from p_1..p_M via m h_m = sum_{i=1}^m h_{m-i} p_i."""
    h = [1 + 0j]
    for m in range(1, len(p) + 1):
        h.append(sum(h[m - i] * p[i - 1] for i in range(1, m + 1)) / m)
    return h


def newton_p_from_e(e, count):
    """p_1..p_count from e_0..e_n (e_m = 0 beyond n)."""
    n = len(e) - 1

    def e_at(i):
        return e[i] if i <= n else 0

    p = []
    for m in range(1, count + 1):
        acc = (-1) ** (m - 1) * m * e_at(m)
        acc += sum((-1) ** (i - 1) * e_at(i) * p[m - i - 1] for i in range(1, m))
        p.append(acc)
    return p


def exterior_trace_from_powers(p, m):
    """trace of the m-th exterior power: sum_{mu |- m} (1/Z_mu) (-1)^(m+t) prod p_{m_j}."""
    total = 0j
    for mu in partitions_of(m):
        term = math.prod((p[part - 1] for part in mu), start=1 + 0j)
        total += (-1) ** (m + len(mu)) * term / z_mu(mu)
    return total


def dickson_eval(e, k, j):
    """D_j^(k)(e_1..e_n): the j-th elementary function of the k-th powers."""
    n = len(e) - 1
    if not 1 <= j <= n or k < 1:
        raise ValidationError(f"need 1 <= j <= n and k >= 1, got j={j}, k={k}, n={n}")
    p = newton_p_from_e(list(e), n * k)
    subsampled = [p[k * i - 1] for i in range(1, n + 1)]
    return newton_e_from_p(subsampled)[j]


# --- Roots ---

def _cauchy_bound(coeffs):
    a = np.asarray(coeffs, dtype=complex)
    return 1 + np.max(np.abs(a[:-1] / a[-1])) if len(a) > 1 else 1.0


def _aberth(coeffs, rng):
    """Aberth-Ehrlich iteration from a perturbed circle of Cauchy-bound radius."""
    n = len(coeffs) - 1
    desc = np.asarray(coeffs, dtype=complex)[::-1]
    deriv = np.polyder(desc)
    radius = _cauchy_bound(coeffs)
    phases = 2 * np.pi * (np.arange(n) + rng.uniform(0.1, 0.9, n)) / n
    z = radius * rng.uniform(0.5, 1.0) * np.exp(1j * phases)
    for _ in range(MAX_ITERATIONS):
        val = np.polyval(desc, z)
        vald = np.polyval(deriv, z)
        ratio = np.divide(val, vald, out=np.zeros_like(val), where=vald != 0)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1)
        repulsion = (1 / diff).sum(axis=1) - 1
        denom = 1 - ratio * repulsion
        delta = np.divide(ratio, denom, out=ratio.copy(), where=denom != 0)
        z = z - delta
        if np.all(np.abs(delta) <= 1e-14 * (1 + np.abs(z))):
            return z, True
    return z, False


def _residual_ok(coeffs, roots):
    desc = np.asarray(coeffs, dtype=complex)[::-1]
    scale = np.sum(np.abs(desc))
    return bool(np.all(np.abs(np.polyval(desc, roots)) <= 1e-8 * scale))


def _polish(coeffs, roots, steps=3):
    desc = np.asarray(coeffs, dtype=complex)[::-1]
    deriv = np.polyder(desc)
    for _ in range(steps):
        vald = np.polyval(deriv, roots)
        step = np.divide(np.polyval(desc, roots), vald, out=np.zeros_like(roots), where=vald != 0)
        roots = roots - step
    return roots


def poly_roots(coeffs, seed=DEFAULT_SEED):
    """Roots of sum_k a_k X^k, coefficients in ascending order."""
    a = [complex(c) for c in coeffs]
    if len(a) < 2:
        return []
    if a[-1] == 0:
        raise DegenerateLeading("leading coefficient is zero")
    if len(a) == 2:
        return [-a[0] / a[1]]
    rng = np.random.default_rng(seed)
    roots = None
    for _ in range(RESTARTS):
        roots, _ = _aberth(a, rng)
        if _residual_ok(a, roots):
            break
    else:
        # Companion-matrix eigenvalues as the last resort
        roots = _polish(a, np.polynomial.polynomial.polyroots(np.asarray(a, dtype=complex)))
    return sorted((complex(r) for r in roots), key=lambda r: (round(math.atan2(r.imag, r.real), 12), abs(r)))


def roots_on_unit_circle(coeffs, tol=ROOT_TOL):
    roots = poly_roots(coeffs)
    deviation = max((abs(abs(r) - 1) for r in roots), default=0.0)
    return deviation <= tol, deviation


def delta_deform(coeffs, delta):
    """a_k -> a_k delta^(k(n-k))."""
    n = len(coeffs) - 1
    return [c * delta ** (k * (n - k)) for k, c in enumerate(coeffs)]


@dataclass
class LPolynomialData:
    n: int
    power_sums: list
    elem: list
    roots: list
    lstar: list

    def reverse_characteristic(self):
        """Coefficients (-1)^m e_m of prod_i (1 - w_i X)."""
        return [(-1) ** m * e for m, e in enumerate(self.elem)]

    def to_json(self):
        def pack(values):
            return [{"re": complex(v).real, "im": complex(v).imag} for v in values]

        return {
            "n": self.n,
            "power_sums": pack(self.power_sums),
            "elem": pack(self.elem),
            "roots": pack(self.roots),
            "lstar": pack(self.lstar),
        }
