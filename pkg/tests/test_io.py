import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swegsa.grid import Grid, GridMismatch
from swegsa.io import (
    NODATA,
    AsciiGridWriter,
    HeaderMismatch,
    IoError,
    ParseError,
    Raster,
    iter_ascii_grid_rows,
    read_ascii_grid,
    read_csv,
    write_ascii_grid,
    write_csv,
)


def test_single_cell_grid(tmp_path):
    p = tmp_path / "one.asc"
    p.write_text("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n2.5\n")
    r = read_ascii_grid(p)
    assert r.grid.ncols == 1 and r.grid.nrows == 1
    assert r.values.tolist() == [[2.5]]


def test_missing_ncols_is_header_mismatch(tmp_path):
    p = tmp_path / "bad.asc"
    p.write_text("nrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n2.5\n")
    with pytest.raises(HeaderMismatch):
        read_ascii_grid(p)


def test_header_case_insensitive_and_center_origin(tmp_path):
    p = tmp_path / "c.asc"
    p.write_text("NCOLS 2\nNRows 1\nXLLCENTER 0.5\nyllcenter 0.5\nCELLSIZE 1\n1 2\n")
    r = read_ascii_grid(p)
    assert (r.grid.xll, r.grid.yll) == (0.0, 0.0)
    assert r.values.tolist() == [[1.0, 2.0]]


def test_values_may_wrap_lines(tmp_path):
    p = tmp_path / "w.asc"
    p.write_text("ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4 5\n6\n")
    assert read_ascii_grid(p).values.tolist() == [[1, 2, 3], [4, 5, 6]]


def test_parse_error_carries_line_number(tmp_path):
    p = tmp_path / "p.asc"
    p.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 x\n")
    with pytest.raises(ParseError) as err:
        read_ascii_grid(p)
    assert err.value.line == 7


def test_too_few_values(tmp_path):
    p = tmp_path / "p.asc"
    p.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n")
    with pytest.raises(ParseError):
        read_ascii_grid(p)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        read_ascii_grid(tmp_path / "nope.asc")


def test_nodata_written_as_header_token(tmp_path):
    g = Grid(3, 1, 1.0)
    p = tmp_path / "n.asc"
    write_ascii_grid(Raster(g, [[1.5, np.nan, 2.0]]), p)
    lines = p.read_text().splitlines()
    assert lines[5] == "NODATA_value -9999"
    assert lines[6].split() == ["1.5", "-9999", "2.0"]
    back = read_ascii_grid(p)
    assert back.mask.tolist() == [[False, True, False]]


def test_writer_rejects_wrong_row_count(tmp_path):
    g = Grid(2, 2, 1.0)
    with pytest.raises(GridMismatch):
        with AsciiGridWriter(tmp_path / "x.asc", g) as w:
            w.write_row([1.0, 2.0])


finite = st.floats(allow_nan=False, allow_infinity=False, width=64).filter(lambda v: v != NODATA)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(1, 6),
    st.floats(0.01, 100),
    st.floats(-1e6, 1e6),
    st.data(),
)
def test_raster_round_trip_bit_exact(tmp_path_factory, ncols, nrows, cellsize, xll, data):
    g = Grid(ncols, nrows, cellsize, xll, -xll)
    vals = np.array(data.draw(st.lists(finite, min_size=g.size, max_size=g.size))).reshape(g.shape)
    holes = np.array(data.draw(st.lists(st.booleans(), min_size=g.size, max_size=g.size))).reshape(g.shape)
    vals[holes] = np.nan
    p = tmp_path_factory.mktemp("rt") / "r.asc"
    write_ascii_grid(Raster(g, vals), p)
    back = read_ascii_grid(p)
    assert back.grid == g
    assert np.array_equal(back.values.view(np.uint64)[~holes], vals.view(np.uint64)[~holes])
    assert np.array_equal(back.mask, holes)


def test_round_trip_ten_thousand_random_rasters(tmp_path):
    rng = np.random.default_rng(3)
    p = tmp_path / "r.asc"
    for _ in range(10_000):
        ncols, nrows = rng.integers(1, 5, size=2)
        g = Grid(int(ncols), int(nrows), float(rng.uniform(0.1, 10)), float(rng.normal() * 1e3), 0.0)
        vals = rng.normal(size=g.shape) * 10.0 ** rng.integers(-300, 300, size=g.shape)
        r = Raster(g, vals)
        write_ascii_grid(r, p)
        assert read_ascii_grid(p) == r


def test_streaming_read_yields_rows_north_first(tmp_path):
    g = Grid(2, 3, 1.0)
    vals = np.arange(6.0).reshape(3, 2)
    p = tmp_path / "s.asc"
    write_ascii_grid(Raster(g, vals), p)
    grid, nodata, rows = iter_ascii_grid_rows(p)
    assert grid == g and nodata == NODATA
    assert [r.tolist() for r in rows] == vals.tolist()


def test_empty_table_is_header_only(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [])
    assert p.read_text() == "a,b\n"
    t = read_csv(p)
    assert t.columns == ["a", "b"] and len(t) == 0


def test_csv_round_trip_with_quoting(tmp_path):
    p = tmp_path / "t.csv"
    rows = [
        {"name": 'x, "quoted"', "v": 0.1 + 0.2, "k": 3, "flag": True, "miss": None},
        {"name": "plain", "v": float("nan"), "k": -1, "flag": False, "miss": None},
    ]
    cols = ["name", "v", "k", "flag", "miss"]
    write_csv(p, cols, rows)
    back = read_csv(p)
    assert back.rows[0] == rows[0]
    assert back.rows[1]["name"] == "plain" and np.isnan(back.rows[1]["v"])
    assert back.rows[1]["flag"] is False


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, st.integers(-10**12, 10**12)), max_size=20))
def test_csv_float_round_trip(tmp_path_factory, pairs):
    p = tmp_path_factory.mktemp("csv") / "t.csv"
    rows = [{"x": x, "i": i} for x, i in pairs]
    write_csv(p, ["x", "i"], rows)
    back = read_csv(p).rows
    assert [float(r["x"]) for r in back] == [x for x, _ in pairs]
    assert [r["i"] for r in back] == [i for _, i in pairs]


def test_csv_ragged_row_is_parse_error(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1\n")
    with pytest.raises(ParseError):
        read_csv(p)
