"""
Tunable limits, tolerances and the per-invocation task configuration.
"""

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

# Field tables
DEFAULT_TABLE_CAP = 2**24 - 1
CACHE_ENV_VAR = "BKL_CACHE_DIR"
CACHE_DB_NAME = "bkl_cache.duckdb"

# Sum guards
MAX_SUM_TERMS = 10**8
MAX_RECURSION_FIELD = 10**6
CHUNK_SIZE = 1 << 16

# Hecke oracle
MAX_GROUP_ORDER = 50_000
DEFAULT_SEED = 0x42
DIAGONALIZATION_DRAWS = 5

# Tolerances
SUM_TERM_ATOL = 1e-12
SUM_REL_TOL = 1e-9
ROUTE_TOL = 1e-7
ROOT_TOL = 1e-6
MATCH_TOL = 1e-6
MATCH_GAP = 1e-3
CONVERSE_GAP = 1e-4


def atol(value, terms):
    """Absolute tolerance for a compensated sum of `terms` unit-modulus terms."""
    return SUM_TERM_ATOL * terms + SUM_REL_TOL * abs(value)


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol


def default_cache_dir() -> Optional[Path]:
    value = os.environ.get(CACHE_ENV_VAR)
    return Path(value) if value else None


@dataclass(frozen=True)
class Tolerances:
    route: float = ROUTE_TOL
    roots: float = ROOT_TOL
    match: float = MATCH_TOL

    @classmethod
    def from_override(cls, tol: Optional[float]):
        if tol is None:
            return cls()
        return cls(route=tol, roots=max(tol, ROOT_TOL), match=max(tol, MATCH_TOL))


@dataclass
class TaskConfig:
    """Parsed command-line task. Scalars stay as raw strings until a field exists."""

    p: int
    e: int = 1
    n: Optional[int] = None
    lam: Optional[tuple] = None
    alpha: Optional[tuple] = None
    psi_twist: str = "1"
    c: str = "1"
    m_range: Optional[tuple] = None
    route: str = "both"
    k: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)
    table_cap: int = DEFAULT_TABLE_CAP
    cache_dir: Optional[Path] = None
    output_format: str = "json"
    force: bool = False
    seed: int = DEFAULT_SEED

    @property
    def q(self):
        return self.p**self.e

    def field_degree(self, n=None, m_max=None, k=None):
        """Ambient degree N covering every lcm(n_i, m_j) and base-change degree k."""
        n = n or self.n or 1
        top = max(n, m_max or 0, 1)
        k = k or self.k
        return math.lcm(*range(1, top + 1)) * k
