import duckdb
import pandas as pd
from datetime import datetime
from pathlib import Path

from src.config import CACHE_DB_NAME


class Storage:
    """DuckDB memo cache for Bessel values and verify results.

    Rows are keyed by the ambient-field key, so values computed under a
    different modulus or generator never mix.
    """

    def __init__(self, cache_dir=None):
        if cache_dir:
            Path(cache_dir).mkdir(parents=True, exist_ok=True)
            self.db_path = str(Path(cache_dir) / CACHE_DB_NAME)
        else:
            self.db_path = ":memory:"
        self.con = duckdb.connect(self.db_path)
        self._init_schema()

    def _init_schema(self):
        # Memoized values of the full-support recursion
        self.con.execute("""
            CREATE TABLE IF NOT EXISTS bessel_values (
                field_key VARCHAR,
                rep_key VARCHAR,
                point_key VARCHAR,
                psi_twist BIGINT,
                re DOUBLE,
                im DOUBLE,
                PRIMARY KEY (field_key, rep_key, point_key, psi_twist)
            )
        """)

        # One row per verify check
        self.con.execute("""
            CREATE TABLE IF NOT EXISTS check_results (
                run_key VARCHAR,
                check_name VARCHAR,
                cases INTEGER,
                metric VARCHAR,
                value DOUBLE,
                passed BOOLEAN,
                recorded_at TIMESTAMP,
                PRIMARY KEY (run_key, check_name)
            )
        """)

    # --- Bessel values ---

    def get_bessel(self, field_key, rep_key, point_key, psi_twist):
        row = self.con.execute("""
            SELECT re, im FROM bessel_values
            WHERE field_key = ? AND rep_key = ? AND point_key = ? AND psi_twist = ?
        """, (field_key, rep_key, point_key, int(psi_twist))).fetchone()
        return complex(row[0], row[1]) if row else None

    def put_bessel(self, field_key, rep_key, point_key, psi_twist, value):
        value = complex(value)
        self.con.execute("""
            INSERT OR REPLACE INTO bessel_values VALUES (?, ?, ?, ?, ?, ?)
        """, (field_key, rep_key, point_key, int(psi_twist), value.real, value.imag))

    def get_bessel_values(self, field_key=None):
        if field_key:
            return self.con.execute(
                "SELECT * FROM bessel_values WHERE field_key = ? ORDER BY rep_key, point_key",
                (field_key,),
            ).fetchdf()
        return self.con.execute("SELECT * FROM bessel_values ORDER BY field_key, rep_key, point_key").fetchdf()

    def count_bessel_values(self):
        return self.con.execute("SELECT COUNT(*) FROM bessel_values").fetchone()[0]

    # --- Check results ---

    def record_check(self, run_key, check_name, cases, metric, value, passed):
        self.con.execute("""
            INSERT OR REPLACE INTO check_results VALUES (?, ?, ?, ?, ?, ?, ?)
        """, (run_key, check_name, int(cases), metric, float(value), bool(passed), datetime.now()))

    def get_check_results(self, run_key=None):
        if run_key:
            return self.con.execute(
                "SELECT * FROM check_results WHERE run_key = ? ORDER BY check_name", (run_key,)
            ).fetchdf()
        return self.con.execute("SELECT * FROM check_results ORDER BY run_key, check_name").fetchdf()

    # --- Export ---

    def export_parquet(self, filepath, table="bessel_values", key=None):
        self._frame(table, key).to_parquet(filepath, engine="pyarrow", index=False)

    def export_csv(self, filepath, table="bessel_values", key=None):
        self._frame(table, key).to_csv(filepath, index=False, float_format="%.17g")

    def _frame(self, table, key=None):
        """Rows of `table`, narrowed to one field key or run key when given."""
        if table == "bessel_values":
            return self.get_bessel_values(key)
        if table == "check_results":
            return self.get_check_results(key)
        raise ValueError(f"unknown table {table!r}")

    def close(self):
        self.con.close()


def write_frame(df: pd.DataFrame, filepath, fmt):
    """Write a flattened result table as csv or parquet."""
    if fmt == "csv":
        df.to_csv(filepath, index=False, float_format="%.17g")
    elif fmt == "parquet":
        df.to_parquet(filepath, engine="pyarrow", index=False)
    else:
        raise ValueError(f"unsupported format {fmt!r}")
