"""CSV ingestion and result serialization."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .core import Series
from .errors import DataError, InvalidData, ShapeError

__all__ = [
    "read_series_csv",
    "read_matrix_series_csv",
    "write_series_csv",
    "write_matrix_series_csv",
    "write_matrix_csv",
    "read_matrix_csv",
    "to_jsonable",
    "dump_json",
]

PathLike = Union[str, Path]


def _read_rows(path: PathLike) -> list[list[str]]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    return rows


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse(cell: str, row: int, col: int) -> float:
    try:
        val = float(cell)
    except ValueError:
        raise InvalidData(f"non-numeric cell {cell.strip()!r} at row {row}, column {col}") from None
    if not np.isfinite(val):
        raise InvalidData(f"non-finite cell {cell.strip()!r} at row {row}, column {col}")
    return val


def read_series_csv(path: PathLike, has_header: Optional[bool] = None) -> Series:
    """Read an ``n x p`` panel. Rows are time points.

    ``has_header=None`` treats the first row as a header when none of its cells
    parses as a number. Row and column numbers in errors are 1-based file
    coordinates.
    """
    rows = _read_rows(path)
    if has_header is None:
        has_header = not any(_is_number(c) for c in rows[0])
    names: tuple[str, ...] = ()
    start = 0
    if has_header:
        names = tuple(c.strip() for c in rows[0])
        start = 1
    body = rows[start:]
    if not body:
        raise DataError(f"{path} has no data rows")
    width = len(names) if names else len(body[0])
    data = np.empty((len(body), width))
    for r, row in enumerate(body):
        line = r + start + 1
        if len(row) != width:
            raise ShapeError(f"row {line} has {len(row)} fields, expected {width}")
        for c, cell in enumerate(row):
            data[r, c] = _parse(cell, line, c + 1)
    return Series(data, names)


def read_matrix_series_csv(path: PathLike) -> np.ndarray:
    """Read long-format ``t,i,j,value`` rows (1-based indices) into ``(n, p, q)``."""
    rows = _read_rows(path)
    header = [c.strip() for c in rows[0]]
    if header != ["t", "i", "j", "value"]:
        raise DataError(f"expected header 't,i,j,value', got {','.join(header)!r}")
    cells: dict[tuple[int, int, int], float] = {}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ShapeError(f"row {r} has {len(row)} fields, expected 4")
        try:
            key = tuple(int(x) for x in row[:3])
        except ValueError:
            raise InvalidData(f"non-integer index at row {r}") from None
        if min(key) < 1:
            raise InvalidData(f"indices must be >= 1 at row {r}")
        if key in cells:
            raise DataError(f"duplicate entry (t, i, j) = {key} at row {r}")
        cells[key] = _parse(row[3], r, 4)
    if not cells:
        raise DataError(f"{path} has no data rows")
    n, p, q = (max(k[a] for k in cells) for a in range(3))
    if len(cells) != n * p * q:
        missing = [
            (t, i, j)
            for t in range(1, n + 1)
            for i in range(1, p + 1)
            for j in range(1, q + 1)
            if (t, i, j) not in cells
        ]
        shown = ", ".join(str(m) for m in missing[:10])
        raise DataError(f"{len(missing)} missing grid cells, e.g. {shown}")
    out = np.empty((n, p, q))
    for (t, i, j), v in cells.items():
        out[t - 1, i - 1, j - 1] = v
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(path: PathLike, data: np.ndarray, names: Optional[list[str]] = None) -> None:
    """Write a panel with a header row (``x1..xp`` unless ``names`` is given)."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    names = names or [f"x{j + 1}" for j in range(data.shape[1])]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        w.writerows([[_fmt(v) for v in row] for row in data])


def write_matrix_csv(path: PathLike, m: np.ndarray) -> None:
    """Headerless CSV of a matrix; shortest round-trip float repr, so reading back is exact."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    with Path(path).open("w", newline="") as fh:
        csv.writer(fh).writerows([[_fmt(v) for v in row] for row in m])


def read_matrix_csv(path: PathLike) -> np.ndarray:
    return read_series_csv(path, has_header=False).data


def write_matrix_series_csv(path: PathLike, y: np.ndarray) -> None:
    """Write ``(n, p, q)`` data in long format with header ``t,i,j,value``."""
    y = np.asarray(y, dtype=float)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "i", "j", "value"])
        for t, i, j in np.ndindex(*y.shape):
            w.writerow([t + 1, i + 1, j + 1, _fmt(y[t, i, j])])


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy containers and scalars to plain Python."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(doc: dict[str, Any]) -> str:
    return json.dumps(to_jsonable(doc), indent=2, allow_nan=False)
