"""Regular square-cell grids shared by rasters and the solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridMismatch(ValueError):
    """Two grids that must coincide do not."""


@dataclass(frozen=True)
class Grid:
    """Georeferenced regular grid with square cells.

    Arrays laid on a grid have shape ``(nrows, ncols)`` with row 0 the
    northernmost row, as in ESRI ASCII files.
    """

    ncols: int
    nrows: int
    cellsize: float
    xll: float = 0.0
    yll: float = 0.0

    def __post_init__(self):
        if int(self.ncols) != self.ncols or self.ncols < 1:
            raise ValueError(f"ncols must be a positive integer, got {self.ncols}")
        if int(self.nrows) != self.nrows or self.nrows < 1:
            raise ValueError(f"nrows must be a positive integer, got {self.nrows}")
        if not np.isfinite(self.cellsize) or self.cellsize <= 0:
            raise ValueError(f"cellsize must be > 0, got {self.cellsize}")
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "cellsize", float(self.cellsize))
        object.__setattr__(self, "xll", float(self.xll))
        object.__setattr__(self, "yll", float(self.yll))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def size(self) -> int:
        return self.nrows * self.ncols

    @property
    def width(self) -> float:
        return self.ncols * self.cellsize

    @property
    def height(self) -> float:
        return self.nrows * self.cellsize

    @property
    def xmax(self) -> float:
        return self.xll + self.width

    @property
    def ymax(self) -> float:
        return self.yll + self.height

    @property
    def cell_area(self) -> float:
        return self.cellsize * self.cellsize

    def x_centers(self) -> np.ndarray:
        return self.xll + (np.arange(self.ncols) + 0.5) * self.cellsize

    def y_centers(self) -> np.ndarray:
        """Cell-center northings, north row first."""
        return self.yll + (self.nrows - np.arange(self.nrows) - 0.5) * self.cellsize

    def contains(self, x: float, y: float) -> bool:
        return self.xll <= x <= self.xmax and self.yll <= y <= self.ymax

    def same_extent(self, other: "Grid", rtol: float = 1e-9) -> bool:
        scale = max(abs(self.width), abs(self.height), 1.0)
        return all(
            abs(a - b) <= rtol * scale
            for a, b in [
                (self.xll, other.xll),
                (self.yll, other.yll),
                (self.xmax, other.xmax),
                (self.ymax, other.ymax),
            ]
        )

    def with_cellsize(self, cellsize: float) -> "Grid":
        """Grid covering the same extent at another resolution.

        Raises GridMismatch when the extent is not a whole number of cells.
        """
        ncols = self.width / cellsize
        nrows = self.height / cellsize
        if abs(ncols - round(ncols)) > 1e-9 * ncols or abs(nrows - round(nrows)) > 1e-9 * nrows:
            raise GridMismatch(
                f"extent {self.width} x {self.height} is not a multiple of cellsize {cellsize}"
            )
        return Grid(int(round(ncols)), int(round(nrows)), cellsize, self.xll, self.yll)

    def check_same(self, other: "Grid", what: str = "grids") -> None:
        if self != other:
            raise GridMismatch(f"{what} differ: {self} vs {other}")
