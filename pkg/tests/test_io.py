from __future__ import annotations

import numpy as np
import pytest

from hdts.errors import DataError, InvalidData, ShapeError
from hdts.io import (
    dump_json,
    read_matrix_csv,
    read_matrix_series_csv,
    read_series_csv,
    write_matrix_csv,
    write_matrix_series_csv,
    write_series_csv,
)


def test_read_plain_and_header(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2\n3,4\n5,6\n")
    s = read_series_csv(f)
    assert (s.n, s.p) == (3, 2) and s.names == ()
    g = tmp_path / "b.csv"
    g.write_text("a,b\n1,2\n3,4\n")
    assert read_series_csv(g).names == ("a", "b")


def test_read_errors_name_coordinates(tmp_path):
    f = tmp_path / "na.csv"
    f.write_text("a,b\n1,2\n3,NA\n")
    with pytest.raises(InvalidData, match="row 3, column 2"):
        read_series_csv(f)
    g = tmp_path / "ragged.csv"
    g.write_text("1,2\n3\n")
    with pytest.raises(ShapeError, match="row 2"):
        read_series_csv(g)
    with pytest.raises(DataError, match="not found"):
        read_series_csv(tmp_path / "missing.csv")
    e = tmp_path / "empty.csv"
    e.write_text("")
    with pytest.raises(DataError):
        read_series_csv(e)


def test_matrix_series_grid(tmp_path):
    y = np.random.default_rng(0).standard_normal((2, 2, 2))
    f = tmp_path / "m.csv"
    write_matrix_series_csv(f, y)
    back = read_matrix_series_csv(f)
    assert back.shape == (2, 2, 2) and np.array_equal(back, y)
    lines = f.read_text().splitlines()
    g = tmp_path / "missing.csv"
    g.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DataError, match=r"\(2, 2, 2\)"):
        read_matrix_series_csv(g)
    h = tmp_path / "dup.csv"
    h.write_text("\n".join(lines + [lines[1]]) + "\n")
    with pytest.raises(DataError, match="duplicate"):
        read_matrix_series_csv(h)


def test_round_trip_lossless(tmp_path):
    m = np.random.default_rng(1).standard_normal((200, 3)) * 10.0 ** np.arange(-5, 10, 5)
    f = tmp_path / "loading.csv"
    write_matrix_csv(f, m)
    assert np.array_equal(read_matrix_csv(f), m)
    g = tmp_path / "series.csv"
    write_series_csv(g, m)
    assert np.array_equal(read_series_csv(g).data, m)


def test_json_converts_numpy():
    text = dump_json({"a": np.arange(3), "b": np.float64(0.5), "c": np.bool_(True), "d": (np.int64(2),)})
    assert '"a": [\n    0,' in text and '"c": true' in text
