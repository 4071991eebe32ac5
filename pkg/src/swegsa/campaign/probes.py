"""Outputs of interest extracted from a simulation's wse_max field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..grid import Grid
from ..io import Raster
from ..swe.state import SimulationOutput


class OutOfDomain(ValueError):
    """Probe geometry falls outside the simulated grid."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True)
class AreaMean:
    """Mean over cells whose centers lie in ``rect`` (x0, x1, y0, y1) or ``polygon``."""

    rect: tuple[float, float, float, float] | None = None
    polygon: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class AreaMax:
    rect: tuple[float, float, float, float] | None = None
    polygon: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class FullMap:
    """wse_max on the analysis grid, NaN where no covered cell was ever wet."""

    grid: Grid | None = None
    wet_depth: float = 0.01


Probe = Union[Point, AreaMean, AreaMax, FullMap]


def points_in_polygon(x, y, polygon) -> np.ndarray:
    """Even-odd rule; ``x`` and ``y`` broadcast against each other."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    inside = np.zeros(x.shape, dtype=bool)
    pts = list(polygon)
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        if y1 == y2:
            continue
        crosses = (y1 > y) != (y2 > y)
        xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xc)
    return inside


def region_mask(grid: Grid, probe: AreaMean | AreaMax) -> np.ndarray:
    x = grid.x_centers()[None, :]
    y = grid.y_centers()[:, None]
    if probe.rect is not None:
        x0, x1, y0, y1 = probe.rect
        for px, py in ((x0, y0), (x1, y1)):
            if not grid.contains(px, py):
                raise OutOfDomain(f"rectangle corner ({px}, {py}) lies outside the grid")
        mask = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
    elif probe.polygon is not None:
        for px, py in probe.polygon:
            if not grid.contains(px, py):
                raise OutOfDomain(f"polygon vertex ({px}, {py}) lies outside the grid")
        mask = points_in_polygon(x, y, probe.polygon)
    else:
        raise ValueError("area probe needs a rect or a polygon")
    if not mask.any():
        raise OutOfDomain("area probe contains no cell center")
    return mask


def bilinear(grid: Grid, values: np.ndarray, x: float, y: float) -> float:
    """Bilinear interpolation between cell centers, clamped at the border."""
    if not grid.contains(x, y):
        raise OutOfDomain(f"point ({x}, {y}) lies outside the grid")
    fx = (x - grid.xll) / grid.cellsize - 0.5
    fy = (grid.ymax - y) / grid.cellsize - 0.5  # row coordinate, north first
    fx = min(max(fx, 0.0), grid.ncols - 1.0)
    fy = min(max(fy, 0.0), grid.nrows - 1.0)
    c0, r0 = int(np.floor(fx)), int(np.floor(fy))
    c1, r1 = min(c0 + 1, grid.ncols - 1), min(r0 + 1, grid.nrows - 1)
    tx, ty = fx - c0, fy - r0
    if tx == 0.0 and ty == 0.0:
        return float(values[r0, c0])
    top = values[r0, c0] + tx * (values[r0, c1] - values[r0, c0])
    bottom = values[r1, c0] + tx * (values[r1, c1] - values[r1, c0])
    return float(top + ty * (bottom - top))


def block_max(src: Grid, values: np.ndarray, dst: Grid) -> np.ndarray:
    """Max of the source cells whose centers fall in each target cell; NaN-aware."""
    if not src.same_extent(dst):
        raise OutOfDomain(f"analysis grid {dst} does not cover simulation grid {src}")
    cols = np.clip(((src.x_centers() - dst.xll) // dst.cellsize).astype(int), 0, dst.ncols - 1)
    rows = np.clip(((dst.ymax - src.y_centers()) // dst.cellsize).astype(int), 0, dst.nrows - 1)
    idx = (rows[:, None] * dst.ncols + cols[None, :]).ravel()
    out = np.full(dst.size, -np.inf)
    vals = values.ravel()
    ok = ~np.isnan(vals)
    np.maximum.at(out, idx[ok], vals[ok])
    out[np.isneginf(out)] = np.nan
    return out.reshape(dst.shape)


def extract_output(sim: SimulationOutput, probe: Probe):
    """Scalar for point/area probes, Raster for FullMap."""
    grid = sim.grid
    w = sim.wse_max
    if isinstance(probe, Point):
        return bilinear(grid, w, probe.x, probe.y)
    if isinstance(probe, AreaMean):
        return float(np.mean(w[region_mask(grid, probe)]))
    if isinstance(probe, AreaMax):
        return float(np.max(w[region_mask(grid, probe)]))
    if isinstance(probe, FullMap):
        dst = probe.grid or grid
        wet = np.where(sim.hmax > probe.wet_depth, w, np.nan)
        return Raster(dst, block_max(grid, wet, dst))
    raise TypeError(f"unknown probe {probe!r}")


def check_probe(probe: Probe, grid: Grid) -> None:
    """Raise OutOfDomain unless the probe geometry fits ``grid``."""
    if isinstance(probe, Point):
        if not grid.contains(probe.x, probe.y):
            raise OutOfDomain(f"point ({probe.x}, {probe.y}) lies outside the grid")
    elif isinstance(probe, (AreaMean, AreaMax)):
        region_mask(grid, probe)
    elif isinstance(probe, FullMap) and probe.grid is not None and not grid.same_extent(probe.grid):
        raise OutOfDomain(f"analysis grid {probe.grid} does not cover {grid}")
