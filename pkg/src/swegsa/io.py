"""ESRI ASCII grid and CSV serialization.

Floats are written with Python's shortest round-trip repr, so every finite
float64 survives a write/read cycle bit for bit (that is never fewer
significant digits than needed and at most 17). Grids are streamed one row
at a time in both directions.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .grid import Grid, GridMismatch

NODATA = -9999.0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
_HEADER_ALIASES = {"xllcenter": "xllcorner", "yllcenter": "yllcorner"}


class IoError(OSError):
    """Reading or writing a persisted artifact failed."""


class ParseError(ValueError):
    """Malformed file content; carries the offending line number."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


class HeaderMismatch(ValueError):
    """An ASCII grid header lacks a required key."""


@dataclass
class Raster:
    """Scalar field on a grid; NaN marks NODATA cells."""

    grid: Grid
    values: np.ndarray
    nodata: float = NODATA

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @property
    def mask(self) -> np.ndarray:
        """True where the cell is NODATA."""
        return np.isnan(self.values)

    def copy(self) -> "Raster":
        return Raster(self.grid, self.values.copy(), self.nodata)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.nodata == other.nodata
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


def format_float(x: float) -> str:
    return repr(float(x))


def _nodata_token(nodata: float) -> str:
    if float(nodata).is_integer():
        return str(int(nodata))
    return format_float(nodata)


def _format_row(row: np.ndarray, nodata_token: str) -> str:
    return " ".join(nodata_token if v != v else repr(v) for v in row.tolist())


class AsciiGridWriter:
    """Streaming writer: rows are formatted and flushed one at a time.

    >>> with AsciiGridWriter(path, grid) as w:   # doctest: +SKIP
    ...     for row in rows:
    ...         w.write_row(row)
    """

    def __init__(self, path: str | os.PathLike, grid: Grid, nodata: float = NODATA):
        self.path = Path(path)
        self.grid = grid
        self.nodata = nodata
        self._token = _nodata_token(nodata)
        self._rows = 0
        self._fh = None

    def __enter__(self) -> "AsciiGridWriter":
        try:
            self._fh = open(self.path, "w", encoding="ascii", newline="\n")
        except OSError as exc:
            raise IoError(f"cannot write {self.path}: {exc}") from exc
        g = self.grid
        self._fh.write(
            f"ncols {g.ncols}\n"
            f"nrows {g.nrows}\n"
            f"xllcorner {format_float(g.xll)}\n"
            f"yllcorner {format_float(g.yll)}\n"
            f"cellsize {format_float(g.cellsize)}\n"
            f"NODATA_value {self._token}\n"
        )
        return self

    def write_row(self, row) -> None:
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self.grid.ncols,):
            raise GridMismatch(f"row has shape {row.shape}, expected ({self.grid.ncols},)")
        if self._rows >= self.grid.nrows:
            raise GridMismatch(f"more than {self.grid.nrows} rows written")
        self._fh.write(_format_row(row, self._token))
        self._fh.write("\n")
        self._rows += 1

    def __exit__(self, exc_type, exc, tb) -> None:
        self._fh.close()
        if exc_type is None and self._rows != self.grid.nrows:
            raise GridMismatch(f"wrote {self._rows} rows, grid has {self.grid.nrows}")


def write_ascii_grid(raster: Raster, path: str | os.PathLike) -> None:
    with AsciiGridWriter(path, raster.grid, raster.nodata) as w:
        for row in raster.values:
            w.write_row(row)


def _open_text(path):
    try:
        return open(path, "r", encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _parse_header(fh, path) -> tuple[Grid, float, str | None, int]:
    """Consume header lines; return grid, nodata, first data line, its number."""
    header: dict[str, str] = {}
    lineno = 0
    first_data = None
    for line in fh:
        lineno += 1
        parts = line.split()
        if not parts:
            continue
        key = parts[0].lower()
        key = _HEADER_ALIASES.get(key, key)
        if key not in _HEADER_KEYS:
            first_data = line
            break
        if len(parts) != 2:
            raise ParseError(f"malformed header line {line.strip()!r}", path, lineno)
        header[key] = parts[1]
        if parts[0].lower() in _HEADER_ALIASES:
            header["_center_" + key] = "1"
    missing = [k for k in _HEADER_KEYS[:5] if k not in header]
    if missing:
        raise HeaderMismatch(f"{path}: missing header keys: {', '.join(missing)}")
    try:
        ncols = int(header["ncols"])
        nrows = int(header["nrows"])
        cellsize = float(header["cellsize"])
        xll = float(header["xllcorner"])
        yll = float(header["yllcorner"])
        nodata = float(header.get("nodata_value", NODATA))
    except ValueError as exc:
        raise ParseError(f"bad header value: {exc}", path) from exc
    if "_center_xllcorner" in header:
        xll -= cellsize / 2
    if "_center_yllcorner" in header:
        yll -= cellsize / 2
    try:
        grid = Grid(ncols, nrows, cellsize, xll, yll)
    except ValueError as exc:
        raise ParseError(str(exc), path) from exc
    return grid, nodata, first_data, lineno


def iter_ascii_grid_rows(path: str | os.PathLike) -> tuple[Grid, float, Iterator[np.ndarray]]:
    """Open a grid and return (grid, nodata, row iterator), north row first.

    Values are tokenized regardless of line breaks; NODATA becomes NaN.
    """
    fh = _open_text(path)
    try:
        grid, nodata, first, lineno = _parse_header(fh, path)
    except Exception:
        fh.close()
        raise

    def rows() -> Iterator[np.ndarray]:
        n = grid.ncols
        buf = np.empty(0)
        ln = lineno
        emitted = 0
        lines = [first] if first is not None else []
        try:
            for line in _chain(lines, fh):
                try:
                    vals = np.array(line.split(), dtype=np.float64)
                except ValueError as exc:
                    raise ParseError(f"non-numeric value: {exc}", path, ln) from exc
                ln += 1
                if vals.size == 0:
                    continue
                buf = vals if buf.size == 0 else np.concatenate([buf, vals])
                while buf.size >= n:
                    row, buf = buf[:n], buf[n:]
                    if emitted >= grid.nrows:
                        raise ParseError("more values than ncols * nrows", path, ln - 1)
                    row = row.copy()
                    row[row == nodata] = np.nan
                    emitted += 1
                    yield row
            if buf.size or emitted != grid.nrows:
                raise ParseError(
                    f"expected {grid.size} values, got {emitted * n + buf.size}", path, ln
                )
        finally:
            fh.close()

    return grid, nodata, rows()


def _chain(first: list, rest) -> Iterator[str]:
    yield from first
    yield from rest


def read_ascii_grid(path: str | os.PathLike) -> Raster:
    grid, nodata, rows = iter_ascii_grid_rows(path)
    values = np.empty(grid.shape)
    for i, row in enumerate(rows):
        values[i] = row
    return Raster(grid, values, nodata)


# --- tables -----------------------------------------------------------------


@dataclass
class Table:
    """Column-ordered table of rows; cells are str, int, float or None."""

    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else repr(v)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: str | os.PathLike, columns: Sequence[str], rows: Iterable[dict]) -> None:
    """Header row plus one line per row, RFC 4180 quoting where needed."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_cell(r.get(c)) for c in columns])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def parse_cell(text: str):
    """Best-effort typed value of a CSV cell (int, float, bool, None or str)."""
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path: str | os.PathLike, typed: bool = True) -> Table:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                columns = next(reader)
            except StopIteration:
                raise ParseError("empty CSV, no header row", path, 1) from None
            rows = []
            for lineno, rec in enumerate(reader, start=2):
                if len(rec) != len(columns):
                    raise ParseError(
                        f"expected {len(columns)} fields, got {len(rec)}", path, lineno
                    )
                rows.append(
                    {c: (parse_cell(v) if typed else v) for c, v in zip(columns, rec)}
                )
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return Table(columns, rows)
