"""Per-cell Sobol index maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import Grid, GridMismatch
from ..io import Raster
from .estimators import _as_arrays, _indices, clamp


@dataclass
class SobolMap:
    """Index rasters per parameter on a shared grid.

    ``mask`` is True where no index is defined: cells missing an output in
    any run (never or not always flooded) and variance-degenerate cells.
    Masked cells hold NaN, written as NODATA.
    """

    grid: Grid
    names: list[str]
    first: dict[str, Raster]
    total: dict[str, Raster]
    mask: np.ndarray
    first_raw: dict[str, np.ndarray]
    total_raw: dict[str, np.ndarray]

    def raster(self, name: str, order: str) -> Raster:
        if name not in self.names:
            raise KeyError(name)
        return {"first": self.first, "total": self.total}[order][name]


def sobol_map(grid: Grid, y_a, y_b, y_ab, names) -> SobolMap:
    """Estimate first and total indices independently in every cell.

    ``y_a``/``y_b`` have shape ``(n, nrows, ncols)``, ``y_ab`` has shape
    ``(p, n, nrows, ncols)``; NaN marks a cell without output in that run.
    """
    y_a, y_b, y_ab = _as_arrays(y_a, y_b, y_ab)
    if y_a.shape[1:] != grid.shape:
        raise GridMismatch(f"output maps {y_a.shape[1:]} do not match grid {grid.shape}")
    names = list(names)
    if len(names) != y_ab.shape[0]:
        raise ValueError(f"{len(names)} names for {y_ab.shape[0]} A_B blocks")
    missing = (
        np.isnan(y_a).any(axis=0) | np.isnan(y_b).any(axis=0) | np.isnan(y_ab).any(axis=(0, 1))
    )
    fill = lambda y: np.where(np.isnan(y), 0.0, y)  # noqa: E731
    with np.errstate(invalid="ignore"):
        first, total, _, _, degenerate = _indices(fill(y_a), fill(y_b), fill(y_ab))
    mask = missing | degenerate
    first = np.where(mask, np.nan, first)
    total = np.where(mask, np.nan, total)
    return SobolMap(
        grid,
        names,
        {n: Raster(grid, clamp(first[i])) for i, n in enumerate(names)},
        {n: Raster(grid, clamp(total[i])) for i, n in enumerate(names)},
        mask,
        {n: first[i] for i, n in enumerate(names)},
        {n: total[i] for i, n in enumerate(names)},
    )
