import json
import math

import pandas as pd
import pytest

from src import charsum, cli
from src.cli import (
    CheckOutcome,
    CommandResult,
    VerifyRunner,
    config_from_args,
    dump_document,
    emit,
    main,
    parse_m_range,
    parse_scalar,
)
from src.config import CACHE_ENV_VAR
from src.errors import ValidationError, ZeroArgument
from src.hecke_oracle import HeckeReport


@pytest.fixture(autouse=True)
def no_cache(monkeypatch):
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bessel_steinberg(capsys):
    code, out, err = run(capsys, "bessel", "--q", "3", "--n", "2", "--c", "1", "--route", "both")
    assert code == 0
    doc = json.loads(out)
    assert doc["field"]["p"] == 3 and doc["field"]["N"] == 2
    assert (doc["n"], doc["lambda"], doc["alpha"], doc["route"]) == (2, [1, 1], [0, 0], "both")
    m1 = doc["values"][1]
    assert m1["m"] == 1
    assert m1["re"] == pytest.approx(2 / 3, abs=1e-12)
    assert m1["deviation"] < 1e-7
    assert "Building F_" in err


def test_bessel_gl1(capsys):
    code, out, _ = run(capsys, "bessel", "--q", "3", "--n", "1", "--alpha", "1", "--c", "2")
    assert code == 0
    values = json.loads(out)["values"]
    assert [v["re"] for v in values] == pytest.approx([1, -1])


def test_bessel_all_scalars_and_full_support(capsys):
    code, out, _ = run(capsys, "bessel", "--q", "3", "--n", "2", "--c", "all", "--m", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["c"] == [1, 2]
    assert [v["c"] for v in doc["values"]] == [1, 2]
    code, out, _ = run(capsys, "bessel", "--q", "3", "--n", "2", "--point", "1,1|1,1")
    assert json.loads(out)["value"]["re"] == pytest.approx(2 / 3)


def test_bessel_beyond_n_vanishes(capsys):
    code, out, _ = run(capsys, "bessel", "--q", "2", "--n", "2", "--m", "3")
    value = json.loads(out)["values"][0]
    assert code == 0 and abs(complex(value["re"], value["im"])) < 1e-7


@pytest.mark.parametrize(
    "argv",
    [
        ("bessel", "--q", "3", "--n", "3", "--lambda", "1,1"),
        ("bessel", "--q", "4", "--n", "2"),
        ("bessel", "--q", "3", "--n", "2", "--c", "0"),
        ("bessel", "--q", "3", "--n", "2", "--psi-twist", "3"),
        ("bessel", "--n", "2"),
        ("gamma", "--q", "3", "--n", "2"),
        ("bessel", "--q", "3", "--n", "2", "--format", "parquet"),
        ("verify", "--quick", "--format", "parquet"),
    ],
)
def test_validation_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "Error:" in err


def test_cost_guard_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(charsum, "MAX_SUM_TERMS", 1)
    code, _, err = run(capsys, "kloosterman", "--q", "3", "--lambda", "1,1", "--a", "2")
    assert code == 3
    assert "--force" in err


def test_kloosterman(capsys):
    code, out, _ = run(capsys, "kloosterman", "--q", "3", "--lambda", "1,1", "--m", "1", "--a", "2")
    assert code == 0
    value = json.loads(out)["values"][0]
    assert value["re"] == pytest.approx(2.0)
    assert value["im"] == pytest.approx(0.0, abs=1e-12)


def test_gauss(capsys):
    code, out, _ = run(capsys, "gauss", "--q", "3", "--r", "1", "--alpha", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["tau"]["im"] == pytest.approx(-math.sqrt(3))
    assert doc["abs"] == pytest.approx(doc["expected_abs"])


def test_gamma(capsys):
    code, out, _ = run(capsys, "gamma", "--q", "3", "--n", "1", "--mu", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["gamma"]["re"] == pytest.approx(-1)
    assert doc["epsilon0"]["re"] == pytest.approx(-(3**-0.5))


def test_lfunction(capsys):
    code, out, _ = run(capsys, "lfunction", "--q", "3", "--n", "2")
    result = json.loads(out)["results"][0]
    assert code == 0
    assert result["lstar"][1]["re"] == pytest.approx(2 / math.sqrt(3))
    assert result["purity_deviation"] < 1e-6
    assert result["functional_equation_deviation"] < 1e-7


def test_basechange(capsys):
    code, out, _ = run(capsys, "basechange", "--q", "3", "--n", "2", "--k", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"]
    assert doc["field"]["N"] == 4


def test_hecke_check(capsys):
    code, out, err = run(capsys, "hecke-check", "--q", "2", "--n", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] and doc["group_order"] == 6
    assert "Matched 2 classes" in err


def test_failed_check_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "hecke_check", lambda *args, **kwargs: HeckeReport(2, 2, 6, 2, 1.0))
    code, _, err = run(capsys, "hecke-check", "--q", "2", "--n", "2")
    assert code == 4
    assert "Warning" in err


def test_csv_output(capsys):
    code, out, _ = run(capsys, "bessel", "--q", "3", "--n", "2", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "c,m,re,im,deviation"
    assert len(out.splitlines()) == 4


def test_parquet_output(capsys, tmp_path):
    path = tmp_path / "values.parquet"
    code, _, _ = run(capsys, "bessel", "--q", "3", "--n", "2", "--format", "parquet", "--out", str(path))
    assert code == 0
    frame = pd.read_parquet(path)
    assert frame["m"].tolist() == [0, 1, 2]


def test_output_is_reproducible(capsys, tmp_path):
    argv = ("bessel", "--q", "3", "--n", "2", "--c", "all", "--cache-dir", str(tmp_path))
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_json_floats_carry_17_digits():
    text = dump_document({"x": 0.1, "y": [1.0, -0.0, 2 / 3], "n": 3, "flag": True, "gap": float("inf")})
    assert "\"x\": 0.10000000000000001" in text
    assert "1.0," in text and "-0.0," in text
    assert "0.66666666666666663" in text
    doc = json.loads(text)
    assert doc["x"] == 0.1 and doc["y"] == [1.0, -0.0, 2 / 3]
    assert doc["n"] == 3 and doc["flag"] is True
    assert doc["gap"] == float("inf")


def test_emit_skips_exported_results(capsys):
    emit(CommandResult({"a": 1}, exported=True), "json")
    assert capsys.readouterr().out == ""


# --- Parsing ---

def test_parse_scalar(F3):
    assert parse_scalar(F3, "2") == 2
    assert parse_scalar(F3, "5") == 2
    assert parse_scalar(F3, "g^1") == 2
    with pytest.raises(ZeroArgument):
        parse_scalar(F3, "3")
    with pytest.raises(ValidationError):
        parse_scalar(F3, "two")


def test_parse_m_range():
    assert parse_m_range("3") == (3, 3)
    assert parse_m_range("1:3") == (1, 3)
    assert parse_m_range(None) is None
    with pytest.raises(ValidationError):
        parse_m_range("a:b")


def test_config_defaults():
    args = cli.build_parser().parse_args(["bessel", "--q", "3", "--n", "3", "--tol", "1e-9"])
    config = config_from_args(args)
    assert config.lam == (1, 1, 1)
    assert config.alpha == (0, 0, 0)
    assert config.tolerances.route == 1e-9
    assert config.field_degree() == 6


# --- Verify runner ---

def test_check_outcome():
    outcome = CheckOutcome("x")
    outcome.observe(1e-9, 1e-7)
    outcome.observe(1e-8, 1e-7)
    assert outcome.passed and outcome.cases == 2 and outcome.value == 1e-8
    outcome.observe(1.0, 1e-7)
    assert not outcome.passed
    gap = CheckOutcome("y", "min_separation")
    gap.observe_separation(0.5, 1e-4)
    gap.observe_separation(0.1, 1e-4)
    assert gap.value == 0.1 and gap.passed
    assert gap.to_json() == {"check": "y", "cases": 2, "min_separation": 0.1, "passed": True}


@pytest.fixture
def runner():
    args = cli.build_parser().parse_args(["verify", "--q", "2", "--quick"])
    r = VerifyRunner(config_from_args(args), quick=True)
    yield r
    r.close()


@pytest.mark.parametrize("check", ["hand_value", "counting", "cuspidal_dual", "vanishing", "gamma_swap", "converse_separation"])
def test_verify_checks(runner, check):
    outcome = CheckOutcome(check)
    getattr(runner, f"check_{check}")(outcome)
    assert outcome.passed, outcome.value
    assert outcome.cases > 0


def test_verify_exports_this_run(runner, tmp_path):
    runner.storage.record_check(runner.run_key, "hand_value", 2, "max_deviation", 0.0, True)
    runner.storage.record_check("verify:full:seed=1", "hand_value", 2, "max_deviation", 0.5, False)
    path = tmp_path / "checks.csv"
    assert runner.export("csv", str(path))
    frame = pd.read_csv(path)
    assert frame["run_key"].tolist() == [runner.run_key]
    assert frame["passed"].tolist() == [True]
    assert runner.export("parquet", str(tmp_path / "checks.parquet"))
    assert len(pd.read_parquet(tmp_path / "checks.parquet")) == 1
    assert not runner.export("json", str(path))
    assert not runner.export("csv", None)


@pytest.mark.slow
def test_verify_quick(capsys):
    code, out, err = run(capsys, "verify", "--quick")
    doc = json.loads(out)
    assert code == 0, doc
    assert doc["passed"]
    assert len(doc["checks"]) == 18
    assert "✓ " in err
