"""Solver data types: topography, flow state, friction, boundaries, config."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from ..grid import Grid, GridMismatch
from ..io import Raster

H_DRY = 1e-10
GRAVITY = 9.81
SIDES = ("west", "east", "north", "south")


class NonFiniteError(ArithmeticError):
    """A NaN or Inf appeared in the flow state."""

    def __init__(self, message: str, cell: tuple[int, int] | None = None, t: float | None = None):
        super().__init__(message)
        self.cell = cell
        self.t = t


class SimulationTimeout(RuntimeError):
    """The step cap was hit before t_end, usually a collapsing timestep."""


@dataclass(frozen=True, eq=False)
class Topography:
    grid: Grid
    z: np.ndarray

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        if z.shape != self.grid.shape:
            raise GridMismatch(f"z shape {z.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("topography contains non-finite elevations")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_raster(cls, raster: Raster) -> "Topography":
        return cls(raster.grid, raster.values)

    def to_raster(self) -> Raster:
        return Raster(self.grid, self.z.copy())


@dataclass(eq=False)
class FlowState:
    """Depth and depth-averaged velocities on a grid at time ``t``.

    ``u`` points east and ``v`` points north; arrays are north row first.
    """

    grid: Grid
    h: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("h", "u", "v"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape == ():
                arr = np.full(self.grid.shape, float(arr))
            if arr.shape != self.grid.shape:
                raise GridMismatch(f"{name} shape {arr.shape} does not match grid {self.grid.shape}")
            setattr(self, name, arr)

    @classmethod
    def still_water(cls, topo: Topography, level: float) -> "FlowState":
        """Lake at rest with free surface ``level`` (dry above it)."""
        h = np.maximum(level - topo.z, 0.0)
        return cls(topo.grid, h, np.zeros_like(h), np.zeros_like(h))

    @classmethod
    def dry(cls, grid: Grid) -> "FlowState":
        z = np.zeros(grid.shape)
        return cls(grid, z, z.copy(), z.copy())

    def volume(self) -> float:
        return float(np.sum(self.h) * self.grid.cell_area)

    def copy(self) -> "FlowState":
        return FlowState(self.grid, self.h.copy(), self.u.copy(), self.v.copy(), self.t)

    def validate(self, h_dry: float = H_DRY) -> None:
        if np.any(self.h < 0):
            raise ValueError("negative depth in flow state")
        for name in ("h", "u", "v"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                idx = np.unravel_index(np.argmin(np.isfinite(arr)), arr.shape)
                raise NonFiniteError(f"non-finite {name} at cell {idx}", cell=idx, t=self.t)


FrictionLaw = Literal["manning", "strickler", "chezy", "none"]


@dataclass(frozen=True, eq=False)
class FrictionModel:
    """Bed friction law and its coefficient (uniform or per cell).

    Strickler K is converted to Manning n = 1/K; Chezy uses C.
    """

    law: FrictionLaw = "none"
    coefficient: float | np.ndarray = 0.0

    def __post_init__(self):
        law = self.law.lower()
        if law not in ("manning", "strickler", "chezy", "none"):
            raise ValueError(f"unknown friction law {self.law!r}")
        object.__setattr__(self, "law", law)
        coef = np.asarray(self.coefficient, dtype=np.float64)
        if law != "none" and (not np.all(np.isfinite(coef)) or np.any(coef <= 0)):
            raise ValueError(f"{law} coefficient must be > 0")
        object.__setattr__(self, "coefficient", coef if coef.ndim else float(coef))

    @classmethod
    def manning(cls, n) -> "FrictionModel":
        return cls("manning", n)

    def manning_n(self):
        if self.law == "manning":
            return self.coefficient
        if self.law == "strickler":
            return 1.0 / np.asarray(self.coefficient)
        raise ValueError(f"{self.law} law has no Manning coefficient")


@dataclass(frozen=True)
class Hydrograph:
    """Piecewise-linear discharge series, held constant outside its range."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        q = tuple(float(x) for x in self.values)
        if len(t) != len(q) or not t:
            raise ValueError("hydrograph needs matching, nonempty times and values")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("hydrograph times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", q)

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def scaled(self, factor: float) -> "Hydrograph":
        return Hydrograph(self.times, tuple(factor * q for q in self.values))


@dataclass(frozen=True)
class Wall:
    """Reflective boundary: mirrored state, normal velocity negated."""


@dataclass(frozen=True)
class FreeOutflow:
    """Zero-gradient boundary."""


@dataclass(frozen=True)
class Periodic:
    """Wraps to the opposite side; must be set on both sides of an axis."""


@dataclass(frozen=True)
class ImposedDepth:
    depth: float


@dataclass(frozen=True)
class ImposedDischarge:
    """Inflow of unit discharge ``q`` (m^2/s) spread over a side.

    ``span`` limits the inflow to boundary cells ``[start, stop)`` counted
    along the side (west to east, or north to south); the rest of the side
    acts as a wall. ``q`` may be a constant or a Hydrograph.
    """

    q: Union[float, Hydrograph]
    span: tuple[int, int] | None = None

    def discharge(self, t: float) -> float:
        return self.q(t) if isinstance(self.q, Hydrograph) else float(self.q)


BoundaryCondition = Union[Wall, FreeOutflow, Periodic, ImposedDepth, ImposedDischarge]


def _default_boundaries() -> dict:
    return {side: Wall() for side in SIDES}


@dataclass(frozen=True)
class SolverConfig:
    flux_scheme: Literal["hll", "rusanov"] = "hll"
    order: int = 1
    # 2D unsplit updates go unstable above ~0.5 for either order
    cfl: float = 0.5
    g: float = GRAVITY
    h_dry: float = H_DRY
    dt_max: float = 1.0
    max_steps: int = 10**8
    sample_interval: float = 1.0
    boundaries: dict = field(default_factory=_default_boundaries)

    def __post_init__(self):
        scheme = self.flux_scheme.lower()
        if scheme not in ("hll", "rusanov"):
            raise ValueError(f"unknown flux scheme {self.flux_scheme!r}")
        object.__setattr__(self, "flux_scheme", scheme)
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if self.g <= 0:
            raise ValueError("g must be > 0")
        if self.h_dry <= 0:
            raise ValueError("h_dry must be > 0")
        if self.dt_max <= 0 or self.sample_interval <= 0 or self.max_steps < 1:
            raise ValueError("dt_max, sample_interval and max_steps must be positive")
        bcs = _default_boundaries()
        for side, bc in dict(self.boundaries).items():
            if side not in SIDES:
                raise ValueError(f"unknown boundary side {side!r}")
            bcs[side] = bc
        for a, b in (("west", "east"), ("north", "south")):
            if isinstance(bcs[a], Periodic) != isinstance(bcs[b], Periodic):
                raise ValueError(f"periodic boundary must be set on both {a} and {b}")
        object.__setattr__(self, "boundaries", bcs)


@dataclass(eq=False)
class SimulationOutput:
    hmax: np.ndarray
    wse_max: np.ndarray
    final_state: FlowState
    mass_series: list[tuple[float, float]]
    dt_count: int

    @property
    def grid(self) -> Grid:
        return self.final_state.grid
