"""
Epsilon and gamma factors, and Bessel values of generic representations.

Two independent routes give j_m = J_pi(antidiag(I_{n-m}, c I_m)):
  via_L      exotic Kloosterman sums J_1..J_n at a = (-1)^(n-1) c^-1,
             assembled through Newton's identities;
  via_gamma  a sum of epsilon factors over all character tuples of GL_m.
bessel_full_support extends the second route to every support point.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

from src.characters import (
    AddCharacter,
    add_char_value,
    check_add_character,
    enumerate_char_tuples,
    mul_char_value,
)
from src.charsum import KloostermanSpec, compensated_sum, kloosterman, tau_lambda_m
from src.config import MAX_RECURSION_FIELD, ROUTE_TOL, close
from src.errors import CheckFailed, CostExceeded, ValidationError, ZeroArgument
from src.etale import EtaleTensorAlgebra
from src.reps import (
    GenericRepParams,
    SupportPoint,
    canonicalize,
    central_character,
    char_tuple_params,
    contragredient,
    enumerate_generic,
    enumerate_support_points,
    identity_point,
    invert_support_point,
    is_cuspidal,
    params_from_form,
    scale_support_point,
    shintani_base_change,
    validate_support_point,
)
from src.symfun import (
    LPolynomialData,
    dickson_eval,
    exterior_trace_from_powers,
    newton_e_from_p,
    partitions_of,
    phi_mu,
    poly_roots,
    z_mu,
)


def _qpow_half(q, h):
    """q^(h/2) with the half-integer part kept exact: q^(h//2) * sqrt(q)^(h mod 2)."""
    out = float(q) ** (h // 2)
    return out * math.sqrt(q) if h % 2 else out


def _minus_one(F):
    return F.neg(1)


def _signed(F, x, power):
    """(-1)^power * x in F."""
    return F.neg(x) if power % 2 else x


def _check_scalar(F, c):
    if c == 0:
        raise ZeroArgument("Bessel value at c = 0")
    F.require_subfield(c, 1)


def _check_field(F, P):
    if F.q != P.q:
        raise ValidationError(f"field over q={F.q} used for a representation over q={P.q}")


@dataclass
class BesselValueTable:
    P: GenericRepParams
    psi: AddCharacter
    c: int
    values: list
    route: str = "lfunction"
    deviations: Optional[list] = None

    @property
    def n(self):
        return self.P.n

    def lstar(self):
        """q^(m(n-m)/2) j_m, the coefficients of the normalized L-polynomial."""
        n, q = self.n, self.P.q
        return [_qpow_half(q, m * (n - m)) * v for m, v in enumerate(self.values)]

    def bound_violations(self, tol=1e-6):
        n, q = self.n, self.P.q
        return [
            m for m, v in enumerate(self.values)
            if abs(v) > bessel_bound(n, m, q) * (1 + tol)
        ]

    def to_json(self):
        out = {
            "rep": self.P.to_json(),
            "psi_twist": self.psi.b,
            "c": self.c,
            "route": self.route,
            "values": [
                {"m": m, "re": complex(v).real, "im": complex(v).imag}
                for m, v in enumerate(self.values)
            ],
        }
        if self.deviations is not None:
            for entry, dev in zip(out["values"], self.deviations):
                entry["deviation"] = dev
        return out


class BesselMemo:
    """Values of bessel_full_support keyed by (canonical form, support point, psi twist).

    Backed by a storage cache when one is given; writes there are idempotent.
    """

    def __init__(self, field_key, storage=None):
        self.field_key = field_key
        self.storage = storage
        self._values = {}
        self.hits = 0

    def _key(self, form, pt, psi):
        return (form.key(), pt.key(), psi.b)

    def get(self, form, pt, psi):
        key = self._key(form, pt, psi)
        if key in self._values:
            self.hits += 1
            return self._values[key]
        if self.storage is not None:
            value = self.storage.get_bessel(self.field_key, *key)
            if value is not None:
                self.hits += 1
                self._values[key] = value
                return value
        return None

    def put(self, form, pt, psi, value):
        key = self._key(form, pt, psi)
        self._values[key] = value
        if self.storage is not None:
            self.storage.put_bessel(self.field_key, *key, value)

    def __len__(self):
        return len(self._values)


# --- Epsilon and gamma factors ---

def epsilon0(F, P, Q, psi):
    """(-1)^(nm) q^(-nm/2) prod_j tau_{lambda,m_j}(alpha x beta_j, psi)."""
    _check_field(F, P)
    _check_field(F, Q)
    check_add_character(F, psi)
    n, m = P.n, Q.n
    taus = [tau_lambda_m(F, P.alpha, beta, psi) for beta in Q.alpha.chars]
    return (-1) ** (n * m) * _qpow_half(F.q, -n * m) * math.prod(taus, start=1 + 0j)


def gamma(F, P, Q, psi):
    """gamma(P x Q, psi) = q^(-m(n-m-1)/2) omega_Q(-1)^(n-1) epsilon0(P x Q, psi)."""
    n, m = P.n, Q.n
    sign = central_character(F, Q, _minus_one(F)) ** (n - 1)
    return _qpow_half(F.q, -m * (n - m - 1)) * sign * epsilon0(F, P, Q, psi)


def gamma_swap_factor(F, P, Q):
    """gamma(P x Q) / gamma(Q x P) = q^(m(m+1)/2 - n(n+1)/2) omega_P(-1)^(m-1) omega_Q(-1)^(n-1)."""
    n, m = P.n, Q.n
    minus = _minus_one(F)
    sign = central_character(F, P, minus) ** (m - 1) * central_character(F, Q, minus) ** (n - 1)
    return float(F.q) ** ((m * (m + 1) - n * (n + 1)) // 2) * sign


def epsilon0_cuspidal_dual(F, P):
    """Closed form of epsilon0(P x P^v) for cuspidal P: -omega(-1)^(n-1) q^(-n/2)."""
    n = P.n
    return -(central_character(F, P, _minus_one(F)) ** (n - 1)) * _qpow_half(F.q, -n)


def gamma_vector(F, P, psi):
    """(sigma key, gamma(P x sigma)) for every cuspidal sigma of GL_m, 1 <= m <= n/2."""
    out = []
    for m in range(1, P.n // 2 + 1):
        for form in enumerate_generic(m, F.q):
            if is_cuspidal(form):
                out.append((form.key(), gamma(F, P, params_from_form(form), psi)))
    return out


# --- Anti-diagonal Bessel values ---

def kloosterman_argument(F, P, c):
    """a = (-1)^(n-1) c^-1."""
    _check_scalar(F, c)
    return _signed(F, F.inv(c), P.n - 1)


def power_sums(F, P, c, psi, count, force=False):
    """p_m = (-1)^(n-1) J_m(alpha^-1, psi, a) for m = 1..count: power sums of the Frobenius roots."""
    _check_field(F, P)
    a = kloosterman_argument(F, P, c)
    chi = P.alpha.inverse(F.q)
    sign = (-1) ** (P.n - 1)
    return [
        sign * kloosterman(F, KloostermanSpec(P.lam, chi, psi, a, m), force)
        for m in range(1, count + 1)
    ]


def _gl1_psi_factor(F, P, c, psi):
    """At n = 1 both routes carry psi(c^-1) beyond alpha(c); it is divided out."""
    return add_char_value(F, psi, F.inv(c))


def bessel_antidiag_via_L(F, P, c, psi, force=False):
    n, r, q = P.n, P.r, F.q
    p = power_sums(F, P, c, psi, n, force)
    e = newton_e_from_p(p)
    values = [1 + 0j]
    for m in range(1, n + 1):
        values.append((-1) ** m * e[m] * (-1) ** (r * m) * _qpow_half(q, -m * (2 * n - m - 1)))
    if n == 1:
        values[1] /= _gl1_psi_factor(F, P, c, psi)
    return BesselValueTable(P, psi, c, values, route="lfunction")


def bessel_antidiag_via_gamma(F, P, c, psi, m):
    """j_m as a weighted sum of epsilon factors; vanishes for m > n."""
    _check_field(F, P)
    _check_scalar(F, c)
    check_add_character(F, psi)
    if m < 1:
        raise ValidationError(f"m must be at least 1, got {m}")
    n, q = P.n, F.q
    x = _signed(F, c, n - 1)
    terms = []
    for mu in partitions_of(m):
        weight = 1 / (z_mu(mu) * phi_mu(mu, q))
        for beta in enumerate_char_tuples(mu, q):
            value = weight + 0j
            for chi in beta.chars:
                value *= mul_char_value(F, chi, x)
                value *= tau_lambda_m(F, P.alpha, chi.inverse(q), psi)
            terms.append(value)
    out = (-1) ** (n * m) * _qpow_half(q, -m * (n - m - 1) - n * m) * compensated_sum(terms)
    if n == 1 and m == 1:
        out /= _gl1_psi_factor(F, P, c, psi)
    return out


def route_tolerance(F, P, m, tol=ROUTE_TOL):
    """Route comparison tolerance, scaled by the Kloosterman term count."""
    terms = EtaleTensorAlgebra(F, P.lam, m).fiber_size
    return tol * (1 + terms * 1e-6)


def bessel_table(F, P, c, psi, route="both", tol=ROUTE_TOL, force=False):
    """j_0..j_n by the requested route; "both" records per-m deviations and
    raises CheckFailed when they exceed the scaled tolerance."""
    if route not in ("lfunction", "gamma", "both"):
        raise ValidationError(f"unknown route {route!r}")
    n = P.n
    if route == "gamma":
        values = [1 + 0j] + [bessel_antidiag_via_gamma(F, P, c, psi, m) for m in range(1, n + 1)]
        return BesselValueTable(P, psi, c, values, route="gamma")
    table = bessel_antidiag_via_L(F, P, c, psi, force)
    if route == "lfunction":
        return table
    deviations = [0.0]
    for m in range(1, n + 1):
        other = bessel_antidiag_via_gamma(F, P, c, psi, m)
        dev = abs(table.values[m] - other)
        if not close(table.values[m], other, route_tolerance(F, P, m, tol)):
            raise CheckFailed(f"routes disagree at m={m}, c={c}: deviation {dev:.3e}")
        deviations.append(dev)
    table.route = "both"
    table.deviations = deviations
    return table


# --- Full support ---

def bessel_full_support(F, P, pt, psi, memo=None, force=False):
    """J_P at g_{n_1..n_s}(c_1..c_s) through the gamma-factor recursion on the first block."""
    _check_field(F, P)
    check_add_character(F, psi)
    validate_support_point(F, pt, P.n)
    form = canonicalize(P)
    if memo is not None:
        cached = memo.get(form, pt, psi)
        if cached is not None:
            return cached

    c1 = pt.scalars[0]
    omega = central_character(F, P, c1)
    if len(pt.blocks) == 1:
        value = omega
    else:
        q = F.q
        m = P.n - pt.blocks[0]
        if q**m > MAX_RECURSION_FIELD and not force:
            raise CostExceeded(f"recursion over GL_{m}(F_{q}) exceeds q^m <= {MAX_RECURSION_FIELD}; use --force")
        rest = SupportPoint(pt.blocks[1:], tuple(int(F.div(c, c1)) for c in pt.scalars[1:]))
        terms = []
        for mu in partitions_of(m):
            weight = 1 / (z_mu(mu) * phi_mu(mu, q))
            for beta in enumerate_char_tuples(mu, q):
                Q = char_tuple_params(q, beta)
                g = gamma(F, P, contragredient(Q), psi)
                terms.append(weight * g * bessel_full_support(F, Q, rest, psi, memo, force))
        value = omega * compensated_sum(terms)

    if memo is not None:
        memo.put(form, pt, psi, value)
    return value


def full_support_symmetries(F, P, psi, memo=None, force=False):
    """(lhs, rhs) pairs of J(g^-1) = conj J(g) and J(z g) = omega(z) J(g) over every support point."""
    units = [int(z) for z in F.subfield_elements(1)]
    pairs = []
    for pt in enumerate_support_points(F, P.n):
        value = complex(bessel_full_support(F, P, pt, psi, memo, force))
        inverse = bessel_full_support(F, P, invert_support_point(F, pt), psi, memo, force)
        pairs.append((inverse, value.conjugate()))
        for z in units:
            scaled = bessel_full_support(F, P, scale_support_point(F, pt, z), psi, memo, force)
            pairs.append((scaled, central_character(F, P, z) * value))
    return pairs


def antidiag_point(n, m, c):
    """antidiag(I_{n-m}, c I_m) as a support point."""
    if m == 0:
        return identity_point(n)
    if m == n:
        return SupportPoint((n,), (c,))
    return SupportPoint((n - m, m), (1, c))


# --- L-polynomial ---

def lpolynomial(F, P, c, psi, force=False):
    """Power sums, elementary functions, Frobenius roots and L* coefficients."""
    n = P.n
    p = power_sums(F, P, c, psi, n, force)
    e = newton_e_from_p(p)
    # prod_i (X - w_i) in ascending order
    roots = poly_roots([(-1) ** (n - k) * e[n - k] for k in range(n + 1)])
    table = bessel_antidiag_via_L(F, P, c, psi, force)
    return LPolynomialData(n, p, e, roots, table.lstar())


def purity_deviation(data, q):
    """max_i ||w_i| - q^((n-1)/2)| relative to q^((n-1)/2)."""
    weight = _qpow_half(q, data.n - 1)
    return max((abs(abs(w) - weight) / weight for w in data.roots), default=0.0)


def functional_equation(F, P, c, psi, force=False):
    """Pairs (lstar_m(P, psi), omega(c) lstar_{n-m}(P^v, psi^-1))."""
    n = P.n
    lhs = bessel_antidiag_via_L(F, P, c, psi, force).lstar()
    dual = bessel_antidiag_via_L(F, contragredient(P), c, psi.inverse(F), force).lstar()
    omega = central_character(F, P, c)
    return [(lhs[m], omega * dual[n - m]) for m in range(n + 1)]


def bessel_exterior_form(F, P, c, psi, m, force=False):
    """j_m from the trace of the m-th exterior power of Frobenius."""
    n, r, q = P.n, P.r, F.q
    if not 0 <= m <= n:
        raise ValidationError(f"m must lie in 0..{n}, got {m}")
    p = power_sums(F, P, c, psi, max(m, 1), force)
    scale = ((-1) ** (r - 1) * _qpow_half(q, -(n - 1))) ** m
    value = scale * exterior_trace_from_powers(p, m) / _qpow_half(q, m * (n - m))
    if n == 1 and m == 1:
        value /= _gl1_psi_factor(F, P, c, psi)
    return value


def unit_circle_polynomials(table):
    """P(X) = sum_m j_{n-m} q^(m(n-m)/2) X^m and Q(X) = sum_m j_{n-m} X^m, ascending."""
    n, q = table.n, table.P.q
    j = table.values
    P = [j[n - m] * _qpow_half(q, m * (n - m)) for m in range(n + 1)]
    Q = [j[n - m] for m in range(n + 1)]
    return P, Q


def bessel_bound(n, m, q):
    """C(n, m) q^(-m(n-m)/2)."""
    return math.comb(n, m) * _qpow_half(q, -m * (n - m))


# --- Shintani base change ---

@dataclass
class BaseChangeReport:
    k: int
    c: int
    kloosterman: list = field(default_factory=list)
    dickson: list = field(default_factory=list)

    def max_deviation(self, which):
        rows = getattr(self, which)
        return max((abs(lhs - rhs) for _, lhs, rhs in rows), default=0.0)

    def to_json(self):
        def pack(rows):
            return [
                {"m": m, "lhs": {"re": complex(a).real, "im": complex(a).imag},
                 "rhs": {"re": complex(b).real, "im": complex(b).imag},
                 "deviation": abs(a - b)}
                for m, a, b in rows
            ]

        return {
            "k": self.k,
            "c": self.c,
            "kloosterman": pack(self.kloosterman),
            "dickson": pack(self.dickson),
        }


def basechange_check(F, P, k, c, psi, force=False):
    """Kloosterman sums of the base change against J_{km}, and the Dickson relation
    between Bessel values of P and of its base change."""
    _check_field(F, P)
    n, q = P.n, F.q
    Fk = F.rebase(k)
    Pk = shintani_base_change(P, k)
    a = kloosterman_argument(F, P, c)
    report = BaseChangeReport(k, c)

    chi = P.alpha.inverse(q)
    chi_k = Pk.alpha.inverse(Fk.q)
    for m in range(1, n + 1):
        lhs = kloosterman(Fk, KloostermanSpec(Pk.lam, chi_k, psi, a, m), force)
        rhs = kloosterman(F, KloostermanSpec(P.lam, chi, psi, a, k * m), force)
        report.kloosterman.append((m, lhs, rhs))

    b = bessel_antidiag_via_L(F, P, c, psi, force).lstar()
    base_changed = bessel_antidiag_via_L(Fk, Pk, c, psi, force).values
    for m in range(1, n + 1):
        lhs = dickson_eval(b, k, m)
        rhs = ((-1) ** ((k - 1) * m * (n - m))) * _qpow_half(q, k * m * (n - m)) * base_changed[m]
        report.dickson.append((m, lhs, rhs))
    return report
