"""Synthetic river valley used for demos and the desk-scale campaign.

A 100 m x 150 m valley draining north to south: a trapezoidal main channel
down the middle, floodplains rising gently towards the valley sides, and a
cluster of building blocks on both banks. Level S1 is the bare terrain,
S2 adds the buildings.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..grid import Grid
from ..io import Raster, write_ascii_grid

BUILDING_HEIGHT = 3.0
# (x0, x1, y0, y1) in metres, all on 5 m boundaries
BUILDINGS = (
    (25.0, 35.0, 90.0, 105.0),
    (20.0, 35.0, 55.0, 65.0),
    (65.0, 75.0, 95.0, 110.0),
    (65.0, 80.0, 50.0, 60.0),
    (30.0, 40.0, 20.0, 35.0),
)


def valley_grid(cellsize: float = 1.0) -> Grid:
    return Grid(int(round(100 / cellsize)), int(round(150 / cellsize)), cellsize, 0.0, 0.0)


def valley_terrain(grid: Grid) -> np.ndarray:
    x = grid.x_centers()[None, :]
    y = grid.y_centers()[:, None]
    slope = 0.002 * y
    off = np.abs(x - 50.0)
    bank = np.where(off < 6.0, -1.5 + 0.25 * np.maximum(off - 3.0, 0.0), 0.0)
    floodplain = 0.03 * np.maximum(off - 6.0, 0.0)
    return slope + bank + floodplain


def building_mask(grid: Grid) -> np.ndarray:
    x = grid.x_centers()[None, :]
    y = grid.y_centers()[:, None]
    mask = np.zeros(grid.shape, dtype=bool)
    for x0, x1, y0, y1 in BUILDINGS:
        mask |= (x > x0) & (x < x1) & (y > y0) & (y < y1)
    return mask


def structure_levels(cellsize: float = 1.0) -> dict[str, Raster]:
    grid = valley_grid(cellsize)
    s1 = valley_terrain(grid)
    s2 = s1 + np.where(building_mask(grid), BUILDING_HEIGHT, 0.0)
    return {"S1": Raster(grid, s1), "S2": Raster(grid, s2)}


def write_valley(directory, cellsize: float = 1.0) -> dict[str, Path]:
    """Write S1/S2 DEMs as ASCII grids; returns level -> path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for level, raster in structure_levels(cellsize).items():
        path = directory / f"valley_{level.lower()}.asc"
        write_ascii_grid(raster, path)
        paths[level] = path
    return paths


STUDY_TEMPLATE = """\
# Desk-scale flood study on the synthetic valley
[campaign]
n = {n}
seed = {seed}
max_workers = {max_workers}
retries = 1

[scenario]
t_end = {t_end}
flux_scheme = "hll"
order = 1
cfl = 0.5
friction = "manning"
friction_coefficient = 0.03
hydrograph_times = [0.0, {ramp}, {t_end}]
hydrograph_discharge = [0.0, {discharge}, {discharge}]
inlet = [44.0, 56.0]
wet_depth = 0.01

[scenario.boundaries]
north = "inflow"
south = "outflow"

[scenario.structures]
S1 = "{s1}"
S2 = "{s2}"

[parameters.E]
role = "error"
sigma = 0.2
pool = 100

[parameters.S]
role = "structure"
levels = ["S1", "S2"]

[parameters.R]
role = "resolution"
values = [{resolutions}]

[probes.channel]
kind = "point"
x = 50.5
y = 75.5

[probes.bank_mean]
kind = "area_mean"
rect = [20.0, 40.0, 50.0, 110.0]

[probes.bank_max]
kind = "area_max"
rect = [60.0, 85.0, 45.0, 115.0]

[probes.wse]
kind = "full_map"
"""


def write_valley_study(directory, n: int = 64, seed: int = 2024, max_workers: int = 30,
                       t_end: float = 180.0, discharge: float = 100.0,
                       resolutions=(1, 2, 5)) -> Path:
    """DEMs plus a study.toml for the three-parameter (E, S, R) campaign."""
    directory = Path(directory)
    paths = write_valley(directory)
    text = STUDY_TEMPLATE.format(
        n=n, seed=seed, max_workers=max_workers, t_end=float(t_end), ramp=min(60.0, t_end / 3), discharge=float(discharge),
        s1=paths["S1"].name, s2=paths["S2"].name,
        resolutions=", ".join(str(float(r)) for r in resolutions),
    )
    path = directory / "study.toml"
    path.write_text(text)
    return path
