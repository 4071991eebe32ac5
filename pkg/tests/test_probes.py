import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swegsa.campaign.probes import (
    AreaMax,
    AreaMean,
    FullMap,
    OutOfDomain,
    Point,
    bilinear,
    block_max,
    check_probe,
    extract_output,
    points_in_polygon,
)
from swegsa.grid import Grid
from swegsa.swe.state import FlowState, SimulationOutput

GRID = Grid(10, 8, 2.0, 100.0, 200.0)


def sim_output(wse, hmax=None, grid=GRID):
    hmax = np.ones(grid.shape) if hmax is None else hmax
    z = np.zeros(grid.shape)
    state = FlowState(grid, z.copy(), z.copy(), z.copy())
    return SimulationOutput(hmax, wse, state, [], 0)


def field():
    return np.random.default_rng(4).uniform(5, 9, GRID.shape)


def test_point_at_cell_center_is_exact():
    w = field()
    sim = sim_output(w)
    x, y = GRID.x_centers()[3], GRID.y_centers()[5]
    assert extract_output(sim, Point(x, y)) == w[5, 3]


def test_point_between_centers_is_bilinear():
    w = np.add.outer(np.arange(8.0), 10 * np.arange(10.0))  # linear in row and column
    x = GRID.x_centers()[2] + 0.5
    y = GRID.y_centers()[4] - 1.5
    # column 2.25, row 4.75
    assert bilinear(GRID, w, x, y) == pytest.approx(4.75 + 22.5)


def test_point_near_border_is_clamped():
    w = field()
    assert bilinear(GRID, w, GRID.xll, GRID.ymax) == w[0, 0]
    assert bilinear(GRID, w, GRID.xmax, GRID.yll) == w[-1, -1]


def test_area_max_dominates_area_mean():
    sim = sim_output(field())
    rect = (GRID.xll, GRID.xmax, GRID.yll, GRID.ymax)
    assert extract_output(sim, AreaMax(rect=rect)) >= extract_output(sim, AreaMean(rect=rect))
    assert extract_output(sim, AreaMean(rect=rect)) == pytest.approx(sim.wse_max.mean())


def test_uniform_field_gives_constant_everywhere():
    c = 7.25
    sim = sim_output(np.full(GRID.shape, c))
    rect = (104.0, 112.0, 203.0, 211.0)
    tri = ((101.0, 201.0), (119.0, 201.0), (101.0, 215.0))
    assert extract_output(sim, Point(109.3, 207.7)) == c
    assert extract_output(sim, AreaMean(rect=rect)) == c
    assert extract_output(sim, AreaMax(polygon=tri)) == c
    out = extract_output(sim, FullMap(Grid(5, 4, 4.0, 100.0, 200.0)))
    assert np.all(out.values == c)


def test_rect_selects_cell_centers():
    w = field()
    sim = sim_output(w)
    # centers at x = 101, 103, ...; y = 215, 213, ...
    got = extract_output(sim, AreaMean(rect=(102.0, 106.0, 210.0, 214.0)))
    assert got == pytest.approx(w[1:3, 1:3].mean())


def test_polygon_even_odd():
    square = ((0, 0), (4, 0), (4, 4), (0, 4))
    assert points_in_polygon(2.0, 2.0, square)
    assert not points_in_polygon(5.0, 2.0, square)
    ring = ((0, 0), (6, 0), (6, 6), (0, 6), (0, 0), (2, 2), (4, 2), (4, 4), (2, 4), (2, 2))
    assert not points_in_polygon(3.0, 3.0, ring)
    assert points_in_polygon(1.0, 3.0, ring)


def test_out_of_domain():
    sim = sim_output(field())
    with pytest.raises(OutOfDomain):
        extract_output(sim, Point(99.0, 205.0))
    with pytest.raises(OutOfDomain):
        extract_output(sim, AreaMean(rect=(90.0, 110.0, 200.0, 210.0)))
    with pytest.raises(OutOfDomain):
        check_probe(AreaMax(rect=(100.2, 100.4, 200.2, 200.4)), GRID)  # no center inside
    with pytest.raises(OutOfDomain):
        check_probe(FullMap(Grid(5, 5, 4.0, 100.0, 200.0)), GRID)
    check_probe(Point(100.0, 216.0), GRID)


def test_block_max_and_dry_cells():
    src = Grid(4, 2, 1.0)
    w = np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 0.5, np.nan, np.nan]])
    out = block_max(src, w, Grid(2, 1, 2.0))
    assert out.tolist() == [[5.0, 4.0]]
    hmax = np.array([[0.5, 0.5, 0.0, 0.0], [0.5, 0.5, 0.0, 0.005]])
    sim = sim_output(np.ones((2, 4)), hmax, src)
    full = extract_output(sim, FullMap(Grid(2, 1, 2.0), wet_depth=0.01))
    assert full.values[0, 0] == 1.0 and np.isnan(full.values[0, 1])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 4))
def test_block_max_equals_reshape_max(bx, by, k):
    src = Grid(bx * k, by * k, 1.0)
    w = np.random.default_rng(bx * 31 + by).normal(size=src.shape)
    dst = Grid(bx, by, float(k))
    want = w.reshape(by, k, bx, k).max(axis=(1, 3))
    assert np.array_equal(block_max(src, w, dst), want)
