import numpy as np
import pytest

from swegsa.grid import Grid, GridMismatch
from swegsa.gsa.distributions import InputParameter, Uniform
from swegsa.gsa.maps import sobol_map
from swegsa.gsa.sampling import sample

GRID = Grid(6, 4, 1.0)


def field(X):
    """Y = X1 on the west half, X2 on the east half, constant in the last row."""
    n = X.shape[0]
    out = np.empty((n,) + GRID.shape)
    out[:, :, :3] = X[:, 0, None, None]
    out[:, :, 3:] = X[:, 1, None, None]
    out[:, -1, :] = 7.0
    return out


def run(d, f):
    return f(d.A), f(d.B), np.stack([f(d.ab(i)) for i in range(d.p)])


@pytest.fixture(scope="module")
def result():
    d = sample([InputParameter("x1", Uniform(0, 1)), InputParameter("x2", Uniform(0, 1))], 4096, 1)
    return sobol_map(GRID, *run(d, field), d.names)


def test_piecewise_field(result):
    s1 = result.raster("x1", "first").values
    assert np.all(np.abs(s1[:-1, :3] - 1.0) <= 0.05)
    assert np.all(np.abs(s1[:-1, 3:]) <= 0.05)
    s2 = result.raster("x2", "first").values
    assert np.all(np.abs(s2[:-1, 3:] - 1.0) <= 0.05)


def test_constant_cells_are_masked(result):
    assert result.mask[-1].all() and not result.mask[:-1].any()
    for name in ("x1", "x2"):
        for order in ("first", "total"):
            r = result.raster(name, order)
            assert r.grid == GRID
            assert np.isnan(r.values[-1]).all()


def test_total_dominates_first(result):
    for name in result.names:
        s = result.first_raw[name][~result.mask]
        t = result.total_raw[name][~result.mask]
        assert np.all(t >= s - 0.05)


def test_nan_in_any_run_masks_the_cell():
    d = sample([InputParameter("x1", Uniform(0, 1)), InputParameter("x2", Uniform(0, 1))], 64, 2)
    y_a, y_b, y_ab = run(d, field)
    y_ab[1, 5, 0, 0] = np.nan
    res = sobol_map(GRID, y_a, y_b, y_ab, d.names)
    assert res.mask[0, 0] and not res.mask[0, 1]
    assert np.isnan(res.raster("x1", "total").values[0, 0])


def test_errors():
    d = sample([InputParameter("x1", Uniform(0, 1)), InputParameter("x2", Uniform(0, 1))], 16, 3)
    y = run(d, field)
    with pytest.raises(GridMismatch):
        sobol_map(Grid(4, 6, 1.0), *y, d.names)
    with pytest.raises(ValueError):
        sobol_map(GRID, *y, ["x1"])
    res = sobol_map(GRID, *y, d.names)
    with pytest.raises(KeyError):
        res.raster("x3", "first")
