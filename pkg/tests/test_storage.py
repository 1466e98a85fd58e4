import pandas as pd
import pytest

from src.config import CACHE_DB_NAME
from src.storage import Storage, write_frame


@pytest.fixture
def storage():
    s = Storage()
    yield s
    s.close()


def test_bessel_values(storage):
    assert storage.get_bessel("3^1:2:1,0,1", "3:1,0,2", "1,1|1,1", 1) is None
    storage.put_bessel("3^1:2:1,0,1", "3:1,0,2", "1,1|1,1", 1, 2 / 3)
    storage.put_bessel("3^1:2:1,0,1", "3:1,0,2", "1,1|1,1", 1, 2 / 3)
    assert storage.get_bessel("3^1:2:1,0,1", "3:1,0,2", "1,1|1,1", 1) == 2 / 3
    assert storage.get_bessel("3^1:2:1,0,1", "3:1,0,2", "1,1|1,1", 2) is None
    assert storage.count_bessel_values() == 1


def test_values_are_scoped_by_field(storage):
    storage.put_bessel("2^1:2:1,1,1", "2:1,0,2", "2|1", 1, 1 + 0j)
    storage.put_bessel("2^1:6:1,1,0,0,0,0,1", "2:1,0,2", "2|1", 1, -1j)
    frame = storage.get_bessel_values("2^1:6:1,1,0,0,0,0,1")
    assert len(frame) == 1
    assert frame["im"].iloc[0] == -1
    assert len(storage.get_bessel_values()) == 2


def test_check_results(storage):
    storage.record_check("verify:quick", "hand_value", 2, "max_deviation", 1e-16, True)
    storage.record_check("verify:quick", "converse_separation", 10, "min_separation", 0.25, True)
    storage.record_check("verify:quick", "hand_value", 2, "max_deviation", 0.5, False)
    frame = storage.get_check_results("verify:quick")
    assert list(frame["check_name"]) == ["converse_separation", "hand_value"]
    row = frame[frame["check_name"] == "hand_value"].iloc[0]
    assert not row["passed"]
    assert row["value"] == 0.5


def test_exports(storage, tmp_path):
    storage.put_bessel("k", "r", "p", 1, 0.5 - 0.25j)
    storage.export_parquet(tmp_path / "values.parquet")
    storage.export_csv(tmp_path / "values.csv")
    assert pd.read_parquet(tmp_path / "values.parquet")["re"].tolist() == [0.5]
    assert pd.read_csv(tmp_path / "values.csv")["im"].tolist() == [-0.25]
    with pytest.raises(ValueError):
        storage.export_csv(tmp_path / "x.csv", table="points")


def test_export_narrows_to_one_run(storage, tmp_path):
    storage.record_check("verify:quick", "hand_value", 2, "max_deviation", 1e-16, True)
    storage.record_check("verify:full", "hand_value", 2, "max_deviation", 0.1, False)
    storage.export_csv(tmp_path / "quick.csv", table="check_results", key="verify:quick")
    storage.export_parquet(tmp_path / "all.parquet", table="check_results")
    quick = pd.read_csv(tmp_path / "quick.csv")
    assert quick["run_key"].tolist() == ["verify:quick"]
    assert quick["value"].tolist() == [1e-16]
    assert len(pd.read_parquet(tmp_path / "all.parquet")) == 2


def test_cache_dir_persists(tmp_path):
    first = Storage(tmp_path / "cache")
    first.put_bessel("k", "r", "p", 1, 1j)
    first.close()
    assert (tmp_path / "cache" / CACHE_DB_NAME).exists()
    second = Storage(tmp_path / "cache")
    assert second.get_bessel("k", "r", "p", 1) == 1j
    second.close()


def test_write_frame(tmp_path):
    df = pd.DataFrame([{"m": 1, "re": 0.5, "im": 0.0}])
    write_frame(df, tmp_path / "out.csv", "csv")
    write_frame(df, tmp_path / "out.parquet", "parquet")
    assert pd.read_parquet(tmp_path / "out.parquet").equals(df)
    with pytest.raises(ValueError):
        write_frame(df, tmp_path / "out.xlsx", "xlsx")
