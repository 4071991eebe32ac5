"""Turning sampled parameter rows into concrete simulation inputs."""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from ..grid import Grid, GridMismatch
from ..gsa.sampling import uniform_stream
from ..io import Raster, read_ascii_grid
from ..swe.solver import run_simulation
from ..swe.state import (
    FlowState,
    FrictionModel,
    Hydrograph,
    ImposedDischarge,
    SolverConfig,
    Topography,
)


class MissingVariant(KeyError):
    """Structure level without a registered DEM."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing structure variant"


class IncompatibleExtent(ValueError):
    """Target resolution cannot tile the source domain."""


def generate_error_grid(grid: Grid, sigma: float, seed: int) -> Raster:
    """I.i.d. Normal(0, sigma) per cell, north row first, from one Philox stream."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return Raster(grid, np.zeros(grid.shape))
    u = uniform_stream(seed, 0, grid.size)
    return Raster(grid, (sigma * ndtri(u)).reshape(grid.shape))


def apply_error(dem: Raster, error: Raster) -> Raster:
    dem.grid.check_same(error.grid, "DEM and error grid")
    return Raster(dem.grid, dem.values + error.values, dem.nodata)


def select_structure_level(level: str, structures: dict) -> Raster:
    """The registered DEM variant for ``level`` (a Raster or a path)."""
    if level not in structures:
        known = ", ".join(sorted(structures)) or "none"
        raise MissingVariant(f"structure level {level!r} has no registered DEM (known: {known})")
    dem = structures[level]
    if not isinstance(dem, Raster):
        dem = read_ascii_grid(dem)
    return dem


def _overlap(n_src: int, src: float, n_dst: int, dst: float) -> np.ndarray:
    """Fraction of each source interval lying in each target interval, (n_dst, n_src)."""
    s_lo = np.arange(n_src) * src
    d_lo = np.arange(n_dst) * dst
    lo = np.maximum(d_lo[:, None], s_lo[None, :])
    hi = np.minimum(d_lo[:, None] + dst, s_lo[None, :] + src)
    return np.clip(hi - lo, 0.0, None) / dst


def resample_dem(dem: Raster, target: float) -> Raster:
    """Area-weighted mean of the source cells covering each target cell.

    Source cells straddling a target edge contribute by overlap area, so the
    volume integral of z is preserved for any resolution ratio.
    """
    grid = dem.grid
    if target < grid.cellsize * (1 - 1e-12):
        raise IncompatibleExtent(
            f"target resolution {target} m is finer than the source {grid.cellsize} m"
        )
    try:
        dst = grid.with_cellsize(target)
    except GridMismatch as exc:
        raise IncompatibleExtent(str(exc)) from None
    if dst.cellsize == grid.cellsize:
        return dem.copy()
    if np.isnan(dem.values).any():
        raise ValueError("cannot resample a DEM with NODATA cells")
    wx = _overlap(grid.ncols, grid.cellsize, dst.ncols, dst.cellsize)
    wy = _overlap(grid.nrows, grid.cellsize, dst.nrows, dst.cellsize)
    z = wy @ dem.values @ wx.T
    return Raster(dst, z, dem.nodata)


@dataclass
class Scenario:
    """Everything one simulation needs; ``checksum`` ignores the run id."""

    run_id: str
    block: str
    row: int
    values: dict
    dem: Raster
    friction: FrictionModel
    solver: SolverConfig
    inflow: Hydrograph | None
    t_end: float
    initial_level: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def checksum(self) -> str:
        h = hashlib.sha256()
        meta = {
            "values": {k: _jsonable(v) for k, v in self.values.items()},
            "friction": [self.friction.law, _jsonable(self.friction.coefficient)],
            "solver": repr(self.solver),
            "inflow": None if self.inflow is None else [
                [float(t).hex() for t in self.inflow.times],
                [float(q).hex() for q in self.inflow.values],
            ],
            "t_end": float(self.t_end).hex(),
            "initial_level": None if self.initial_level is None else float(self.initial_level).hex(),
            "grid": repr(self.dem.grid),
            "extra": self.extra,
        }
        h.update(json.dumps(meta, sort_keys=True).encode())
        h.update(np.ascontiguousarray(self.dem.values, dtype="<f8").tobytes())
        return h.hexdigest()


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        return float(v).hex()
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return hashlib.sha256(np.ascontiguousarray(v, dtype="<f8").tobytes()).hexdigest()
    return v


def error_seed(study_seed: int, key) -> int:
    """Seed of the error grid for occurrence ``key`` (int index or float draw)."""
    if isinstance(key, float):
        key = struct.unpack("<Q", struct.pack("<d", key))[0]
    ss = np.random.SeedSequence([int(study_seed) & ((1 << 64) - 1), int(key), 0x45525252])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def inlet_span(grid: Grid, side: str, inlet) -> tuple[int, int]:
    """Boundary cell range ``[start, stop)`` whose centers fall in ``inlet``."""
    if side in ("north", "south"):
        centers, n = grid.x_centers(), grid.ncols
    else:
        centers, n = grid.y_centers(), grid.nrows
    if inlet is None:
        return 0, n
    a, b = inlet
    idx = np.nonzero((centers >= a) & (centers <= b))[0]
    if idx.size == 0:
        raise ValueError(f"inlet [{a}, {b}] contains no {side} boundary cell at {grid.cellsize} m")
    return int(idx[0]), int(idx[-1]) + 1


def realize_scenario(row, config, run_id: str = "", block: str = "", index: int = 0) -> Scenario:
    """Structure level -> DEM error -> resampling, then hydraulic inputs.

    ``config`` is a StudyConfig; ``row`` holds one value per parameter in
    declaration order.
    """
    row = [float(x) for x in row]
    if len(row) != len(config.parameters):
        raise ValueError(f"row has {len(row)} values for {len(config.parameters)} parameters")
    sc = config.scenario
    values = {}
    by_role = {}
    for spec, x in zip(config.parameters, row):
        by_role[spec.role] = (spec, x)
        if spec.role == "structure":
            values[spec.param.name] = spec.param.distribution.label(x)
        elif spec.role == "error" and spec.pool is not None:
            values[spec.param.name] = int(x)
        else:
            values[spec.param.name] = x

    level = config.structure_levels()[0]
    if "structure" in by_role:
        spec, x = by_role["structure"]
        level = spec.param.distribution.label(x)
    dem = config.structure_raster(level)
    if "error" in by_role:
        spec, x = by_role["error"]
        key = int(x) if spec.pool is not None else x
        err = generate_error_grid(dem.grid, spec.sigma, error_seed(config.seed, key))
        dem = apply_error(dem, err)
    if "resolution" in by_role:
        dem = resample_dem(dem, by_role["resolution"][1])

    friction = sc.friction
    if "friction" in by_role:
        law = friction.law if friction.law != "none" else "manning"
        friction = FrictionModel(law, by_role["friction"][1])
    inflow = sc.inflow
    if inflow is not None and "discharge" in by_role:
        inflow = inflow.scaled(by_role["discharge"][1])

    solver = sc.solver
    if sc.inflow_side is not None and inflow is not None:
        span = inlet_span(dem.grid, sc.inflow_side, sc.inlet)
        width = (span[1] - span[0]) * dem.grid.cellsize
        bcs = dict(solver.boundaries)
        bcs[sc.inflow_side] = ImposedDischarge(inflow.scaled(1.0 / width), span)
        solver = replace(solver, boundaries=bcs)

    return Scenario(run_id, block, index, values, dem, friction, solver, inflow, sc.t_end,
                    sc.initial_level, {"level": level})


def simulate_scenario(scenario: Scenario, initial_depth: Raster | None = None):
    """Run the solver on a realized scenario."""
    topo = Topography.from_raster(scenario.dem)
    grid = topo.grid
    if initial_depth is not None:
        initial_depth.grid.check_same(grid, "initial depth and DEM grids")
        h = np.nan_to_num(initial_depth.values, nan=0.0)
        state = FlowState(grid, h, np.zeros(grid.shape), np.zeros(grid.shape))
    elif scenario.initial_level is not None:
        state = FlowState.still_water(topo, scenario.initial_level)
    else:
        state = FlowState.dry(grid)
    return run_simulation(topo, state, scenario.friction, scenario.solver, scenario.t_end)
