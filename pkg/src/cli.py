"""
Command-line front end: one subcommand per computation plus the `verify`
acceptance runner. Documents go to stdout as JSON (or a flattened CSV /
parquet table); progress and warnings go to stderr.
"""

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from src.characters import AddCharacter, MulCharacter, default_twists
from src.charsum import (
    KloostermanSpec,
    gauss_orbit_period,
    gauss_quadratic_lift,
    gauss_sum,
    hasse_davenport,
    kloosterman,
)
from src.config import (
    CONVERSE_GAP,
    DEFAULT_SEED,
    DEFAULT_TABLE_CAP,
    TaskConfig,
    Tolerances,
    atol,
    default_cache_dir,
)
from src.errors import BesselError, DegreeMismatch, ToleranceError, ValidationError, ZeroArgument
from src.etale import EtaleTensorAlgebra
from src.ff_tower import PrimePower, build_ambient
from src.gamma_bessel import (
    BesselMemo,
    basechange_check,
    bessel_antidiag_via_L,
    bessel_antidiag_via_gamma,
    bessel_bound,
    bessel_exterior_form,
    bessel_full_support,
    bessel_table,
    epsilon0,
    epsilon0_cuspidal_dual,
    full_support_symmetries,
    functional_equation,
    gamma,
    gamma_swap_factor,
    gamma_vector,
    lpolynomial,
    purity_deviation,
    route_tolerance,
    unit_circle_polynomials,
)
from src.hecke_oracle import hecke_check
from src.reps import (
    GenericRepParams,
    SupportPoint,
    central_character,
    central_exponent,
    contragredient,
    counting_identity,
    enumerate_generic,
    is_cuspidal,
    params_from_form,
)
from src.storage import Storage, write_frame
from src.symfun import roots_on_unit_circle


def log(message):
    print(message, file=sys.stderr)


def _complex(value):
    value = complex(value)
    return {"re": value.real, "im": value.imag}


FLOAT_MARK = "@f17:"
FLOAT_FORMAT = "%.17g"


def _pin_floats(obj):
    if isinstance(obj, float) and math.isfinite(obj):
        text = FLOAT_FORMAT % obj
        if "." not in text and "e" not in text:
            text += ".0"
        return FLOAT_MARK + text
    if isinstance(obj, dict):
        return {k: _pin_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pin_floats(v) for v in obj]
    return obj


def dump_document(document):
    """Indented JSON with every finite float written to 17 significant digits."""
    text = json.dumps(_pin_floats(document), indent=2, ensure_ascii=False)
    return re.sub(rf'"{FLOAT_MARK}([^"]+)"', r"\1", text)


# --- Argument parsing ---

def parse_int_list(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}")


def parse_m_range(text):
    """"3" or "1:3" (inclusive)."""
    if text is None:
        return None
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise ValidationError(f"bad --m value {text!r}")


def parse_scalar(F, text):
    """An F_q^x element: an integer of F_p, or g^j for the j-th power of the F_q generator."""
    text = str(text).strip()
    if text.startswith("g^"):
        try:
            j = int(text[2:])
        except ValueError:
            raise ValidationError(f"bad generator power {text!r}")
        return int(F.from_dlog(j, 1))
    try:
        code = F.prime_field_element(int(text))
    except ValueError:
        raise ValidationError(f"bad field scalar {text!r}")
    if code == 0:
        raise ZeroArgument(f"scalar {text!r} is zero in F_{F.p}")
    return code


def parse_scalars(F, text):
    if str(text).strip() == "all":
        return [int(x) for x in F.subfield_elements(1)]
    return [parse_scalar(F, text)]


def parse_point(F, text):
    """"blocks|scalars", e.g. "1,1|1,g^1"."""
    try:
        blocks_text, scalars_text = text.split("|", 1)
    except ValueError:
        raise ValidationError(f"support point must look like 'n1,n2|c1,c2', got {text!r}")
    blocks = parse_int_list(blocks_text)
    scalars = tuple(parse_scalar(F, s) for s in scalars_text.split(",") if s.strip())
    return SupportPoint(blocks, scalars)


def config_from_args(args):
    lam = parse_int_list(args.lam) if getattr(args, "lam", None) else None
    n = getattr(args, "n", None)
    if lam is None and n is not None:
        lam = (1,) * n
    if lam is not None:
        if n is not None and n != sum(lam):
            raise DegreeMismatch(f"lambda {lam} is not a partition of n={n}")
        n = sum(lam)
    alpha = parse_int_list(args.alpha) if getattr(args, "alpha", None) else None
    if lam is not None and alpha is None:
        alpha = (0,) * len(lam)
    if lam is not None and len(alpha) != len(lam):
        raise DegreeMismatch(f"{len(alpha)} alpha exponents for lambda {lam}")
    cache_dir = args.cache_dir or default_cache_dir()
    if args.q is None:
        raise ValidationError("--q is required")
    return TaskConfig(
        p=args.q,
        e=args.ext,
        n=n,
        lam=lam,
        alpha=alpha,
        psi_twist=args.psi_twist,
        c=args.c,
        m_range=parse_m_range(args.m),
        route=args.route,
        k=args.k,
        tolerances=Tolerances.from_override(args.tol),
        table_cap=args.cap,
        cache_dir=cache_dir,
        output_format=args.format,
        force=args.force,
        seed=args.seed,
    )


def build_field(config, n=None, m_max=None, k=None):
    N = config.field_degree(n, m_max, k)
    base = PrimePower(config.p, config.e)
    log(f"Building F_{{{base.q}^{N}}}...")
    F = build_ambient(base, N, cap=config.table_cap, cache_dir=config.cache_dir)
    log(f"✓ Field ready: {F.order} elements")
    return F


def rep_from_config(config, q=None):
    if config.lam is None:
        raise ValidationError("--n or --lambda is required")
    return GenericRepParams.from_exponents(q or config.q, config.lam, config.alpha)


def psi_from_config(F, config):
    return AddCharacter(parse_scalar(F, config.psi_twist))


@dataclass
class CommandResult:
    document: dict
    rows: list = field(default_factory=list)
    passed: Optional[bool] = None
    exported: bool = False


# --- Subcommands ---

def cmd_bessel(config, args):
    n = config.n
    lo, hi = config.m_range or (0, n)
    F = build_field(config, n, max(hi, n))
    P = rep_from_config(config)
    psi = psi_from_config(F, config)
    doc = {
        "field": F.descriptor(),
        "q": F.q,
        "n": n,
        "lambda": list(config.lam),
        "alpha": list(config.alpha),
        "psi_twist": psi.b,
        "route": config.route,
    }
    if args.point:
        pt = parse_point(F, args.point)
        storage = Storage(config.cache_dir)
        try:
            value = bessel_full_support(F, P, pt, psi, BesselMemo(F.key(), storage), config.force)
        finally:
            storage.close()
        doc.update({"point": pt.to_json(), "value": _complex(value)})
        return CommandResult(doc, [{"point": pt.key(), **_complex(value)}])

    scalars = parse_scalars(F, config.c)
    doc["c"] = scalars if len(scalars) > 1 else scalars[0]
    values = []
    for c in scalars:
        table = bessel_table(F, P, c, psi, config.route, config.tolerances.route, config.force)
        for m in range(lo, hi + 1):
            if m <= n:
                entry = {"c": c, "m": m, **_complex(table.values[m])}
                if table.deviations is not None:
                    entry["deviation"] = table.deviations[m]
            else:
                entry = {"c": c, "m": m, **_complex(bessel_antidiag_via_gamma(F, P, c, psi, m))}
            values.append(entry)
    doc["values"] = values
    return CommandResult(doc, values)


def cmd_lfunction(config, args):
    n = config.n
    F = build_field(config, n)
    P = rep_from_config(config)
    psi = psi_from_config(F, config)
    results, rows = [], []
    for c in parse_scalars(F, config.c):
        data = lpolynomial(F, P, c, psi, config.force)
        purity = purity_deviation(data, F.q)
        fe = max(abs(a - b) for a, b in functional_equation(F, P, c, psi, config.force))
        entry = {"c": c, **data.to_json(), "purity_deviation": purity, "functional_equation_deviation": fe}
        results.append(entry)
        rows.extend({"c": c, "m": m, **_complex(v)} for m, v in enumerate(data.lstar))
    doc = {"field": F.descriptor(), "q": F.q, "n": n, "lambda": list(config.lam),
           "alpha": list(config.alpha), "psi_twist": psi.b, "results": results}
    return CommandResult(doc, rows)


def cmd_gamma(config, args):
    if not args.mu:
        raise ValidationError("gamma needs --mu (and optionally --beta) for the second representation")
    mu = parse_int_list(args.mu)
    beta = parse_int_list(args.beta) if args.beta else (0,) * len(mu)
    if len(beta) != len(mu):
        raise DegreeMismatch(f"{len(beta)} beta exponents for mu {mu}")
    F = build_field(config, max(config.n, sum(mu)))
    P = rep_from_config(config)
    Q = GenericRepParams.from_exponents(F.q, mu, beta)
    psi = psi_from_config(F, config)
    eps = epsilon0(F, P, Q, psi)
    gam = gamma(F, P, Q, psi)
    doc = {"field": F.descriptor(), "q": F.q, "pi": P.to_json(), "sigma": Q.to_json(),
           "psi_twist": psi.b, "epsilon0": _complex(eps), "gamma": _complex(gam)}
    return CommandResult(doc, [{"quantity": "epsilon0", **_complex(eps)}, {"quantity": "gamma", **_complex(gam)}])


def cmd_kloosterman(config, args):
    lo, hi = config.m_range or (1, 1)
    F = build_field(config, config.n, hi)
    psi = psi_from_config(F, config)
    chi = rep_from_config(config).alpha
    a = parse_scalar(F, args.a)
    rows = []
    for m in range(max(lo, 1), hi + 1):
        value = kloosterman(F, KloostermanSpec(config.lam, chi, psi, a, m), config.force)
        rows.append({"m": m, **_complex(value)})
    doc = {"field": F.descriptor(), "q": F.q, "lambda": list(config.lam), "chi": list(config.alpha),
           "psi_twist": psi.b, "a": a, "values": rows}
    return CommandResult(doc, rows)


def cmd_gauss(config, args):
    r = args.r
    F = build_field(config, r)
    psi = psi_from_config(F, config)
    exponent = config.alpha[0] if config.alpha else 0
    chi = MulCharacter(r, exponent % (F.q**r - 1))
    value = gauss_sum(F, chi, psi)
    doc = {"field": F.descriptor(), "q": F.q, "r": r, "exponent": chi.exponent, "psi_twist": psi.b,
           "tau": _complex(value), "abs": abs(value), "expected_abs": math.sqrt(F.q**r) if chi.exponent else 1.0}
    return CommandResult(doc, [{"r": r, "exponent": chi.exponent, **_complex(value)}])


def cmd_basechange(config, args):
    n, k = config.n, config.k
    F = build_field(config, n, n, k)
    P = rep_from_config(config)
    psi = psi_from_config(F, config)
    tol = config.tolerances
    reports, rows = [], []
    passed = True
    for c in parse_scalars(F, config.c):
        report = basechange_check(F, P, k, c, psi, config.force)
        ok = report.max_deviation("kloosterman") <= tol.route * (1 + _fiber(F, P, k * n) * 1e-6)
        ok = ok and _relative_max(report.dickson) <= tol.roots
        passed = passed and ok
        reports.append({**report.to_json(), "passed": ok})
        for which in ("kloosterman", "dickson"):
            rows.extend(
                {"c": c, "check": which, "m": m, "deviation": abs(lhs - rhs)}
                for m, lhs, rhs in getattr(report, which)
            )
    doc = {"field": F.descriptor(), "q": F.q, "rep": P.to_json(), "k": k, "psi_twist": psi.b,
           "results": reports, "passed": passed}
    return CommandResult(doc, rows, passed)


def cmd_hecke_check(config, args):
    n = config.n
    F = build_field(config, n)
    psi = psi_from_config(F, config)
    storage = Storage(config.cache_dir)
    try:
        log(f"Building the Hecke algebra of GL_{n}(F_{F.q})...")
        report = hecke_check(F, n, psi, config.seed, BesselMemo(F.key(), storage))
    finally:
        storage.close()
    log(f"✓ Matched {len(report.matches)} classes, max deviation {report.max_deviation:.3e}")
    doc = {"field": F.descriptor(), "psi_twist": psi.b, **report.to_json()}
    rows = [{"class": m.form.key(), "function": m.function, "distance": m.distance} for m in report.matches]
    return CommandResult(doc, rows, report.passed)


def cmd_verify(config, args):
    if config.output_format == "parquet" and not args.out:
        raise ValidationError("--format parquet needs --out")
    runner = VerifyRunner(config, quick=args.quick)
    try:
        outcomes = runner.run()
        exported = runner.export(config.output_format, args.out)
    finally:
        runner.close()
    passed = all(o.passed for o in outcomes)
    doc = {"quick": args.quick, "checks": [o.to_json() for o in outcomes], "passed": passed}
    return CommandResult(doc, [o.to_json() for o in outcomes], passed, exported)


def _fiber(F, P, m):
    return EtaleTensorAlgebra(F, P.lam, m).fiber_size


def _relative_max(rows):
    return max((abs(lhs - rhs) / max(1.0, abs(rhs)) for _, lhs, rhs in rows), default=0.0)


# --- Verify runner ---

ROUTE_GRID = ((2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (4, 2))
HECKE_GRID = ((2, 2), (2, 3), (3, 2), (3, 3))
SMALL_GRID = ((2, 2), (2, 3), (3, 2))
QUICK_HECKE_GRID = ((2, 2), (2, 3))
# (n, q, largest m): vanishing is checked for n < m <= largest m
VANISHING_GRID = ((1, 2, 3), (1, 3, 3), (2, 2, 4), (2, 3, 3), (3, 2, 4))
SWAP_CELLS = ((2, 1), (2, 2), (3, 1), (3, 2))


@dataclass
class CheckOutcome:
    name: str
    metric: str = "max_deviation"
    cases: int = 0
    value: float = 0.0
    passed: bool = True
    error: Optional[str] = None

    def observe(self, deviation, tol):
        deviation = float(deviation)
        self.cases += 1
        self.value = max(self.value, deviation)
        if not deviation <= tol:
            self.passed = False

    def observe_separation(self, separation, gap):
        separation = float(separation)
        self.value = separation if self.cases == 0 else min(self.value, separation)
        self.cases += 1
        if not separation > gap:
            self.passed = False

    def to_json(self):
        out = {"check": self.name, "cases": self.cases, self.metric: self.value, "passed": self.passed}
        if self.error:
            out["error"] = self.error
        return out


class VerifyRunner:
    """Runs the acceptance checks over the fixed grids, one CheckOutcome per check.

    Every check that depends on the additive character runs once per twist
    in default_twists: psi_1 and, for q > 2, psi_g.
    """

    def __init__(self, config, quick=False):
        self.config = config
        self.quick = quick
        self.tol = config.tolerances
        self.storage = Storage(config.cache_dir)
        self.run_key = f"verify:{'quick' if quick else 'full'}:seed={config.seed}"
        self._fields = {}
        self._tables = {}

    def close(self):
        self.storage.close()

    def export(self, fmt, out):
        """Write this run's check_results rows to `out`; False when there is nothing to export."""
        if not out or fmt == "json":
            return False
        if fmt == "csv":
            self.storage.export_csv(out, table="check_results", key=self.run_key)
        else:
            self.storage.export_parquet(out, table="check_results", key=self.run_key)
        log(f"✓ Wrote check results to {out}")
        return True

    @property
    def route_grid(self):
        return SMALL_GRID if self.quick else ROUTE_GRID

    def field(self, p, N):
        if (p, N) not in self._fields:
            self._fields[(p, N)] = build_ambient(
                PrimePower(p), N, cap=self.config.table_cap, cache_dir=self.config.cache_dir
            )
        return self._fields[(p, N)]

    def classes(self, n, q, m_max=None):
        F = self.field(q, math.lcm(*range(1, max(n, m_max or n) + 1)))
        return F, [params_from_form(form) for form in enumerate_generic(n, q)]

    def tables(self, n, q):
        """(F, P, c, psi, via_L table) for every class, every c and every twist of the grid point."""
        if (n, q) not in self._tables:
            F, reps = self.classes(n, q)
            units = [int(x) for x in F.subfield_elements(1)]
            self._tables[(n, q)] = [
                (F, P, c, psi, bessel_antidiag_via_L(F, P, c, psi))
                for psi in default_twists(F)
                for P in reps
                for c in units
            ]
        return self._tables[(n, q)]

    def run(self):
        checks = [
            ("hand_value", self.check_hand_value),
            ("route_equivalence", self.check_route_equivalence),
            ("hecke_oracle", self.check_hecke_oracle),
            ("full_support_symmetry", self.check_full_support_symmetry),
            ("weight_purity", self.check_weight_purity),
            ("bessel_bound", self.check_bessel_bound),
            ("unit_circle", self.check_unit_circle),
            ("functional_equation", self.check_functional_equation),
            ("conjugation_symmetry", self.check_conjugation_symmetry),
            ("exterior_power", self.check_exterior_power),
            ("vanishing", self.check_vanishing),
            ("gamma_multiplicativity", self.check_gamma_multiplicativity),
            ("gamma_swap", self.check_gamma_swap),
            ("base_change", self.check_base_change),
            ("counting", self.check_counting),
            ("gauss_lemmas", self.check_gauss_lemmas),
            ("cuspidal_dual", self.check_cuspidal_dual),
            ("converse_separation", self.check_converse_separation),
        ]
        outcomes = []
        for idx, (name, check) in enumerate(checks):
            log(f"[{idx + 1}/{len(checks)}] {name}...")
            outcome = CheckOutcome(name, "min_separation" if name == "converse_separation" else "max_deviation")
            try:
                check(outcome)
            except ToleranceError as e:
                outcome.passed = False
                outcome.error = str(e)
            mark = "✓" if outcome.passed else "✗"
            log(f"  {mark} {outcome.cases} cases, {outcome.metric} {outcome.value:.3e}")
            self.storage.record_check(self.run_key, name, outcome.cases, outcome.metric, outcome.value, outcome.passed)
            outcomes.append(outcome)
        return outcomes

    # --- Checks ---

    def check_hand_value(self, out):
        F = self.field(3, 2)
        psi = AddCharacter(1)
        P = GenericRepParams.from_exponents(3, (1, 1), (0, 0))
        out.observe(abs(bessel_antidiag_via_L(F, P, 1, psi).values[1] - 2 / 3), 1e-9)
        out.observe(abs(bessel_antidiag_via_gamma(F, P, 1, psi, 1) - 2 / 3), 1e-9)

    def check_route_equivalence(self, out):
        for n, q in self.route_grid:
            for F, P, c, psi, table in self.tables(n, q):
                for m in range(1, n + 1):
                    other = bessel_antidiag_via_gamma(F, P, c, psi, m)
                    out.observe(abs(table.values[m] - other), route_tolerance(F, P, m, self.tol.route))

    def check_hecke_oracle(self, out):
        grid = QUICK_HECKE_GRID if self.quick else HECKE_GRID
        for n, q in grid:
            F, _ = self.classes(n, q)
            for psi in default_twists(F):
                report = hecke_check(F, n, psi, self.config.seed, BesselMemo(F.key(), self.storage))
                out.observe(report.commutator_defect, 1e-9)
                for match in report.matches:
                    out.observe(match.distance, self.tol.match)

    def check_full_support_symmetry(self, out):
        grid = SMALL_GRID if self.quick else SMALL_GRID + ((3, 3),)
        for n, q in grid:
            F, reps = self.classes(n, q)
            memo = BesselMemo(F.key(), self.storage)
            for psi in default_twists(F):
                for P in reps:
                    for lhs, rhs in full_support_symmetries(F, P, psi, memo):
                        out.observe(abs(lhs - rhs), self.tol.route)

    def check_weight_purity(self, out):
        for n, q in self.route_grid:
            for F, P, c, psi, _ in self.tables(n, q):
                out.observe(purity_deviation(lpolynomial(F, P, c, psi), q), self.tol.roots)

    def check_bessel_bound(self, out):
        for n, q in self.route_grid:
            for *_, table in self.tables(n, q):
                for m, v in enumerate(table.values):
                    out.observe(max(0.0, abs(v) - bessel_bound(n, m, q) * (1 + 1e-6)), 0.0)

    def check_unit_circle(self, out):
        for n, q in self.route_grid:
            for *_, table in self.tables(n, q):
                for poly in unit_circle_polynomials(table):
                    _, deviation = roots_on_unit_circle(poly, self.tol.roots)
                    out.observe(deviation, self.tol.roots)

    def check_functional_equation(self, out):
        for n, q in self.route_grid:
            for F, P, c, psi, _ in self.tables(n, q):
                for lhs, rhs in functional_equation(F, P, c, psi):
                    out.observe(abs(lhs - rhs), self.tol.route)

    def check_conjugation_symmetry(self, out):
        for n, q in self.route_grid:
            for F, P, c, psi, table in self.tables(n, q):
                omega = central_character(F, P, c)
                dual = bessel_antidiag_via_L(F, contragredient(P), c, psi.inverse(F))
                for m in range(n + 1):
                    conj = table.values[m].conjugate()
                    out.observe(abs(conj - table.values[n - m] / omega), self.tol.route)
                    out.observe(abs(conj - dual.values[m]), self.tol.route)

    def check_exterior_power(self, out):
        for n, q in self.route_grid:
            for F, P, c, psi, table in self.tables(n, q):
                for m in range(1, n + 1):
                    out.observe(abs(bessel_exterior_form(F, P, c, psi, m) - table.values[m]), self.tol.route)

    def check_vanishing(self, out):
        for n, q, top in VANISHING_GRID:
            F, reps = self.classes(n, q, top)
            for psi in default_twists(F):
                for P in reps:
                    for c in F.subfield_elements(1):
                        for m in range(n + 1, top + 1):
                            out.observe(abs(bessel_antidiag_via_gamma(F, P, int(c), psi, m)), self.tol.route)

    def check_gamma_multiplicativity(self, out):
        for n, q in SMALL_GRID:
            F, reps = self.classes(n, q, 3)
            sigma_pairs = [((1,), (1,)), ((2,), (1,))]
            for psi in default_twists(F):
                for P in reps:
                    for mu1, mu2 in sigma_pairs:
                        for b1 in range(q ** mu1[0] - 1):
                            for b2 in range(q ** mu2[0] - 1):
                                s1 = GenericRepParams.from_exponents(q, mu1, (b1,))
                                s2 = GenericRepParams.from_exponents(q, mu2, (b2,))
                                joint = GenericRepParams.from_exponents(q, mu1 + mu2, (b1, b2))
                                m1, m2 = s1.n, s2.n
                                lhs = gamma(F, P, joint, psi)
                                rhs = q ** (m1 * m2) * gamma(F, P, s1, psi) * gamma(F, P, s2, psi)
                                out.observe(abs(lhs - rhs) / max(1.0, abs(rhs)), self.tol.route)

    def check_gamma_swap(self, out):
        for q in (2, 3):
            F = self.field(q, 6)
            for psi in default_twists(F):
                for n, m in SWAP_CELLS:
                    for form in enumerate_generic(n, q):
                        P = params_from_form(form)
                        for other in enumerate_generic(m, q):
                            Q = params_from_form(other)
                            rhs = gamma_swap_factor(F, P, Q) * gamma(F, Q, P, psi)
                            out.observe(abs(gamma(F, P, Q, psi) - rhs) / max(1.0, abs(rhs)), self.tol.route)

    def check_base_change(self, out):
        ks = (2,) if self.quick else (2, 3)
        for n, q in SMALL_GRID:
            for k in ks:
                F = self.field(q, math.lcm(*range(1, n + 1)) * k)
                for psi in default_twists(F):
                    for form in enumerate_generic(n, q):
                        P = params_from_form(form)
                        for c in F.subfield_elements(1):
                            report = basechange_check(F, P, k, int(c), psi)
                            for m, lhs, rhs in report.kloosterman:
                                out.observe(abs(lhs - rhs), max(self.tol.route, atol(rhs, _fiber(F, P, k * m))))
                            for m, lhs, rhs in report.dickson:
                                out.observe(abs(lhs - rhs) / max(1.0, abs(rhs)), self.tol.roots)

    def check_counting(self, out):
        for q in (2, 3, 5):
            for n in range(1, 5):
                out.observe(abs(len(enumerate_generic(n, q)) - (q**n - q ** (n - 1))), 0)
        top = 3 if self.quick else 4
        for q in (2, 3):
            for m in range(1, top + 1):
                for lhs, rhs in counting_identity(m, q).values():
                    out.observe(float(abs(lhs - rhs)), 0)

    def check_gauss_lemmas(self, out):
        top = 4 if self.quick else 8
        rng = np.random.default_rng(self.config.seed)

        def sample(d, q, count=3):
            size = q**d - 1
            return sorted(set(int(x) for x in rng.integers(0, size, size=min(count, size))))

        def observe(pair):
            lhs, rhs = pair
            out.observe(abs(lhs - rhs) / max(1.0, abs(rhs)), 1e-8)

        for q in (2, 3):
            for l in range(1, top + 1):
                F = self.field(q, l)
                divisors = [d for d in range(1, l + 1) if l % d == 0]
                for psi in default_twists(F):
                    for d in divisors:
                        for k in sample(d, q):
                            observe(hasse_davenport(F, MulCharacter(d, k), l, psi))
                    for n in divisors:
                        for m in divisors:
                            if math.lcm(n, m) != l:
                                continue
                            for a in sample(n, q, 2):
                                for b in sample(m, q, 2):
                                    for i in range(math.gcd(n, m)):
                                        observe(gauss_orbit_period(F, MulCharacter(n, a), MulCharacter(m, b), psi, i))
                    if l % 2 == 0:
                        half = l // 2
                        for t in range(1, min(q**half, 4) + 1):
                            observe(gauss_quadratic_lift(F, MulCharacter(l, t * (q**half - 1)), psi))

    def check_cuspidal_dual(self, out):
        for n, q in self.route_grid:
            F, _ = self.classes(n, q)
            for form in enumerate_generic(n, q):
                if not is_cuspidal(form):
                    continue
                P = params_from_form(form)
                dual = contragredient(P)
                for psi in default_twists(F):
                    out.observe(abs(gamma(F, P, dual, psi) + 1), self.tol.route)
                    out.observe(abs(epsilon0(F, P, dual, psi) - epsilon0_cuspidal_dual(F, P)), self.tol.route)

    def check_converse_separation(self, out):
        for n, q in self.route_grid:
            F, reps = self.classes(n, q)
            for psi in default_twists(F):
                by_center = {}
                for P in reps:
                    vector = np.asarray([v for _, v in gamma_vector(F, P, psi)])
                    by_center.setdefault(central_exponent(P), []).append(vector)
                for vectors in by_center.values():
                    for i in range(len(vectors)):
                        for j in range(i + 1, len(vectors)):
                            out.observe_separation(np.max(np.abs(vectors[i] - vectors[j])), CONVERSE_GAP)


# --- Entry point ---

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, default=None, help="Characteristic p of the base field")
    common.add_argument("--ext", type=int, default=1, help="Base field degree e over F_p (q = p^e)")
    common.add_argument("--n", type=int, default=None, help="Rank n of GL_n")
    common.add_argument("--lambda", dest="lam", default=None, help="Composition of n, e.g. 2,1")
    common.add_argument("--alpha", default=None, help="Character exponents, one per part")
    common.add_argument("--psi-twist", default="1", help="Twist b of the additive character")
    common.add_argument("--c", default="1", help="Scalar c: integer, g^j, or all")
    common.add_argument("--m", default=None, help="m or an inclusive range lo:hi")
    common.add_argument("--route", choices=("lfunction", "gamma", "both"), default="both")
    common.add_argument("--k", type=int, default=1, help="Base change degree")
    common.add_argument("--tol", type=float, default=None, help="Override the route tolerance")
    common.add_argument("--cap", type=int, default=DEFAULT_TABLE_CAP, help="Largest dlog table")
    common.add_argument("--cache-dir", default=None, help="Cache directory (default $BKL_CACHE_DIR)")
    common.add_argument("--format", choices=("json", "csv", "parquet"), default="json")
    common.add_argument("--out", default=None, help="Output file (required for parquet)")
    common.add_argument("--force", action="store_true", help="Run sums beyond the cost guards")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)

    parser = argparse.ArgumentParser(description="Bessel functions of GL_n over finite fields")
    sub = parser.add_subparsers(dest="command", required=True)
    bessel = sub.add_parser("bessel", parents=[common], help="Bessel values at antidiag(I, cI)")
    bessel.add_argument("--point", default=None, help="Support point 'n1,n2|c1,c2' for the full-support route")
    sub.add_parser("lfunction", parents=[common], help="Normalized L-polynomial and Frobenius roots")
    gamma_parser = sub.add_parser("gamma", parents=[common], help="epsilon0 and gamma of pi x sigma")
    gamma_parser.add_argument("--mu", default=None, help="Composition for sigma")
    gamma_parser.add_argument("--beta", default=None, help="Character exponents for sigma")
    kl = sub.add_parser("kloosterman", parents=[common], help="Exotic Kloosterman sum J_m")
    kl.add_argument("--a", default="1", help="Argument a in F_q^x")
    gauss = sub.add_parser("gauss", parents=[common], help="Gauss sum tau(chi, psi_r)")
    gauss.add_argument("--r", type=int, default=1, help="Degree of the field carrying chi")
    sub.add_parser("basechange", parents=[common], help="Shintani base change identities")
    sub.add_parser("hecke-check", parents=[common], help="Brute-force Hecke algebra oracle")
    verify = sub.add_parser("verify", parents=[common], help="Run the acceptance grid")
    verify.add_argument("--quick", action="store_true", help="Smaller grid")
    return parser


HANDLERS = {
    "bessel": cmd_bessel,
    "lfunction": cmd_lfunction,
    "gamma": cmd_gamma,
    "kloosterman": cmd_kloosterman,
    "gauss": cmd_gauss,
    "basechange": cmd_basechange,
    "hecke-check": cmd_hecke_check,
    "verify": cmd_verify,
}


def emit(result, fmt, out=None):
    if result.exported:
        return
    if fmt == "json":
        text = dump_document(result.document)
        if out:
            with open(out, "w") as f:
                f.write(text + "\n")
        else:
            print(text)
        return
    df = pd.DataFrame(result.rows)
    if fmt == "parquet" and not out:
        raise ValidationError("--format parquet needs --out")
    if out:
        write_frame(df, out, fmt)
        log(f"✓ Wrote {len(df)} rows to {out}")
    else:
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify" and args.q is None:
            args.q = 2
        config = config_from_args(args)
        result = HANDLERS[args.command](config, args)
        emit(result, config.output_format, args.out)
    except BesselError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    if result.passed is False:
        log("Warning: one or more checks failed")
        return ToleranceError.exit_code
    return 0
