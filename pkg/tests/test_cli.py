from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from hdts.cli import main
from hdts.io import read_matrix_csv, write_series_csv


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _doc(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def iid_csv(tmp_path):
    path = tmp_path / "iid.csv"
    write_series_csv(path, np.random.default_rng(0).standard_normal((200, 10)))
    return path


def test_dgp_then_pca(tmp_path, capsys):
    hits = 0
    for seed in range(10):
        data = tmp_path / f"ex3_{seed}.csv"
        meta = _doc(capsys, "dgp", "--example", "3", "--seed", str(seed), "--out", str(data))
        assert meta["result"]["data"] == str(data) and meta["seed"] == seed
        doc = _doc(capsys, "pca", "--input", str(data), "--permutation", "max", "--seed", "0")
        hits += doc["result"]["NoGroups"] == 3
    assert hits >= 8


def test_wn_test_schema(iid_csv, capsys):
    doc = _doc(capsys, "wn-test", "--input", str(iid_csv), "--lag-k", "2", "--B", "1000", "--seed", "0")
    assert set(doc) == {"method", "params", "result", "timing_ms", "seed"}
    res = doc["result"]
    assert 0 <= res["p_value"] <= 1
    assert res["reject"] == (res["statistic"] > res["critical_value"])
    assert doc["params"]["B"] == 1000 and doc["params"]["lag_k"] == 2


def test_param_echo_reproduces(iid_csv, capsys):
    first = _doc(capsys, "mds-test", "--input", str(iid_csv), "--map", "quad", "--B", "300", "--seed", "4")
    second = _doc(capsys, "mds-test", "--input", str(iid_csv), "--map", "quad", "--B", "300",
                  "--seed", str(first["seed"]), "--threads", "3")
    assert first["result"] == second["result"]


def test_missing_input_exit_2(capsys, caplog):
    code, _, _ = _run(capsys, "factors", "--input", "missing.csv")
    assert code == 2 and "not found" in caplog.text


def test_usage_error_exit_1(capsys):
    code, _, err = _run(capsys, "factors", "--bogus")
    assert code == 1
    code, _, _ = _run(capsys, "nosuch")
    assert code == 1


def test_numeric_error_exit_3(tmp_path, capsys, caplog):
    path = tmp_path / "zero.csv"
    write_series_csv(path, np.zeros((50, 4)))
    code, _, _ = _run(capsys, "factors", "--input", str(path))
    assert code == 3 and "numerical failure" in caplog.text


def test_factors_json_and_csv(tmp_path, capsys):
    data = tmp_path / "ex1.csv"
    _doc(capsys, "dgp", "--example", "1", "--seed", "0", "--out", str(data))
    doc = _doc(capsys, "factors", "--input", str(data))
    assert doc["result"]["factor_num"] == 3
    assert np.array(doc["result"]["loading"]).shape == (200, 3)
    outdir = tmp_path / "mats"
    doc = _doc(capsys, "factors", "--input", str(data), "--format", "csv", "--out-dir", str(outdir))
    loading = read_matrix_csv(doc["result"]["loading"])
    assert loading.shape == (200, 3)


def test_hdsreg_coint_cp_forecast(tmp_path, capsys):
    y, z = tmp_path / "ex2.csv", tmp_path / "z.csv"
    _doc(capsys, "dgp", "--example", "2", "--seed", "1", "--out", str(y), "--out-z", str(z))
    assert _doc(capsys, "hdsreg", "--input", str(y), "--regressors", str(z))["result"]["factor_num"] == 3

    y5 = tmp_path / "ex5.csv"
    _doc(capsys, "dgp", "--example", "5", "--seed", "0", "--out", str(y5))
    doc = _doc(capsys, "coint", "--input", str(y5), "--type", "both")
    assert doc["result"]["coint_rank"] == 3 and set(doc["result"]["rank_by_method"]) == {"acf", "urtest"}

    y4 = tmp_path / "ex4.csv"
    _doc(capsys, "dgp", "--example", "4", "--seed", "0", "--out", str(y4))
    doc = _doc(capsys, "cp", "--input", str(y4), "--method", "refined")
    assert doc["result"]["rank"] == 3
    fc = _doc(capsys, "forecast", "--input", str(y4), "--model", "cp", "--steps", "2")
    assert np.array(fc["result"]["forecast"]).shape == (2, 10, 10)

    y1 = tmp_path / "ex1.csv"
    _doc(capsys, "dgp", "--example", "1", "--seed", "0", "--n", "200", "--p", "30", "--out", str(y1))
    fc = _doc(capsys, "forecast", "--input", str(y1), "--model", "factors", "--steps", "3")
    assert np.array(fc["result"]["forecast"]).shape == (3, 30)


def test_cp_reshape(tmp_path, capsys):
    y4 = tmp_path / "ex4.csv"
    _doc(capsys, "dgp", "--example", "4", "--seed", "2", "--out", str(y4))
    from hdts.io import read_matrix_series_csv

    cube = read_matrix_series_csv(y4)
    wide = tmp_path / "wide.csv"
    write_series_csv(wide, cube.reshape(cube.shape[0], -1))
    a = _doc(capsys, "cp", "--input", str(y4))["result"]
    b = _doc(capsys, "cp", "--input", str(wide), "--reshape", "10", "10")["result"]
    assert a["A"] == b["A"]
    code, _, _ = _run(capsys, "cp", "--input", str(wide), "--reshape", "3", "3")
    assert code == 2


def test_console_script_entry_point(iid_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "hdts.cli", "wn-test", "--input", str(iid_csv), "--B", "200", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "p_value" in json.loads(proc.stdout)["result"]
