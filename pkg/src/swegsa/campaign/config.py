"""Study configuration: a TOML file with [parameters], [scenario], [probes], [campaign].

Relative paths are resolved against the directory holding the file. See the
README for every key with its type and default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from ..grid import Grid
from ..gsa.distributions import (
    Categorical,
    DiscreteUniform,
    InputParameter,
    InvalidDistribution,
    Uniform,
    distribution_from_dict,
)
from ..io import Raster, read_ascii_grid
from ..swe.state import (
    SIDES,
    FreeOutflow,
    FrictionModel,
    Hydrograph,
    ImposedDepth,
    ImposedDischarge,
    SolverConfig,
    Wall,
)
from .probes import AreaMax, AreaMean, FullMap, OutOfDomain, Point, Probe, check_probe

ROLES = ("error", "structure", "resolution", "friction", "discharge")
DEFAULT_MAX_WORKERS = 30


class ConfigError(ValueError):
    """Invalid or incomplete study configuration; names the offending key."""


@dataclass(frozen=True)
class ParameterSpec:
    param: InputParameter
    role: str
    sigma: float = 0.0  # error role only
    pool: int | None = None  # error role: number of pre-generated occurrences


@dataclass
class HydraulicScenario:
    t_end: float
    solver: SolverConfig
    friction: FrictionModel
    inflow: Hydrograph | None = None  # total discharge, m3/s
    inflow_side: str | None = None
    inlet: tuple[float, float] | None = None  # coordinate range along the inflow side
    initial_level: float | None = None
    initial_depth: Path | None = None
    dem: Path | None = None
    wet_depth: float = 0.01


@dataclass
class StudyConfig:
    parameters: list[ParameterSpec]
    scenario: HydraulicScenario
    structures: dict[str, Path | Raster]
    probes: dict[str, Probe]
    n: int = 64
    seed: int = 0
    max_workers: int = DEFAULT_MAX_WORKERS
    retries: int = 1
    source: Path | None = None
    _base: Grid | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.max_workers < 1:
            raise ConfigError(f"campaign.max_workers must be >= 1, got {self.max_workers}")
        if self.retries < 0:
            raise ConfigError(f"campaign.retries must be >= 0, got {self.retries}")
        if self.n < 2:
            raise ConfigError(f"campaign.n must be >= 2, got {self.n}")
        names = [s.param.name for s in self.parameters]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate parameter names in {names}")
        roles = [s.role for s in self.parameters]
        for role in roles:
            if role not in ROLES:
                raise ConfigError(f"unknown parameter role {role!r}; known: {', '.join(ROLES)}")
            if roles.count(role) > 1:
                raise ConfigError(f"role {role!r} is assigned to more than one parameter")

    @property
    def params(self) -> list[InputParameter]:
        return [s.param for s in self.parameters]

    def by_role(self, role: str) -> ParameterSpec | None:
        for s in self.parameters:
            if s.role == role:
                return s
        return None

    def structure_raster(self, level: str) -> Raster:
        from .scenario import select_structure_level

        raster = select_structure_level(level, self.structures)
        self.structures[level] = raster
        return raster

    @property
    def base_grid(self) -> Grid:
        """Common grid of the registered structure DEMs."""
        if self._base is None:
            grids = {level: self.structure_raster(level).grid for level in self.structures}
            if not grids:
                raise ConfigError("scenario.structures registers no DEM")
            first = next(iter(grids.values()))
            for level, g in grids.items():
                if g != first:
                    raise ConfigError(
                        f"scenario.structures.{level} georeference {g} differs from {first}"
                    )
            self._base = first
        return self._base

    def resolutions(self) -> list[float]:
        spec = self.by_role("resolution")
        if spec is None:
            return [self.base_grid.cellsize]
        return [float(v) for v in spec.param.distribution.values]

    @property
    def analysis_grid(self) -> Grid:
        """Coarsest declared resolution over the base extent."""
        return self.base_grid.with_cellsize(max(self.resolutions()))

    def structure_levels(self) -> list[str]:
        spec = self.by_role("structure")
        if spec is None:
            return [next(iter(self.structures))]
        return list(spec.param.distribution.labels)

    def validate(self) -> None:
        """Check files, georeference, levels, resolutions and probe geometry."""
        grid = self.base_grid
        for level in self.structure_levels():
            if level not in self.structures:
                raise ConfigError(
                    f"parameters: structure level {level!r} has no entry in scenario.structures"
                )
        for r in self.resolutions():
            try:
                grid.with_cellsize(r)
            except ValueError as exc:
                raise ConfigError(f"resolution {r} m: {exc}") from None
            if r < grid.cellsize:
                raise ConfigError(f"resolution {r} m is finer than the DEMs ({grid.cellsize} m)")
        for name, probe in self.probes.items():
            try:
                check_probe(probe, grid)
            except OutOfDomain as exc:
                raise ConfigError(f"probes.{name}: {exc}") from None


def _get(table: dict, key: str, where: str, kind=None, default=...):
    if key not in table:
        if default is ...:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    value = table[key]
    if kind is not None:
        kinds = kind if isinstance(kind, tuple) else (kind,)
        if float in kinds and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kinds) or isinstance(value, bool) and bool not in kinds:
            raise ConfigError(f"{where}.{key} has type {type(value).__name__}, expected "
                              + " or ".join(k.__name__ for k in kinds))
    return value


def _path(base: Path, value: str, where: str) -> Path:
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"{where}: file {str(p)!r} does not exist")
    return p


def _parameter(name: str, table: dict) -> ParameterSpec:
    where = f"parameters.{name}"
    role = _get(table, "role", where, str)
    try:
        if role == "error":
            sigma = _get(table, "sigma", where, float, 0.2)
            if sigma < 0:
                raise ConfigError(f"{where}.sigma must be >= 0")
            pool = _get(table, "pool", where, int, None)
            if pool is not None:
                if pool < 2:
                    raise ConfigError(f"{where}.pool must be >= 2")
                dist = DiscreteUniform(tuple(float(k) for k in range(pool)))
            else:
                dist = Uniform(0.0, 1.0)
            return ParameterSpec(InputParameter(name, dist), role, sigma, pool)
        if role == "structure":
            levels = _get(table, "levels", where, list)
            return ParameterSpec(InputParameter(name, Categorical(tuple(str(v) for v in levels))), role)
        if role == "resolution":
            values = _get(table, "values", where, list)
            return ParameterSpec(InputParameter(name, DiscreteUniform(tuple(float(v) for v in values))), role)
        if role in ("friction", "discharge"):
            spec = _get(table, "distribution", where, dict)
            return ParameterSpec(InputParameter(name, distribution_from_dict(dict(spec))), role)
    except (InvalidDistribution, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.role {role!r} is not one of {', '.join(ROLES)}")


def _probe(name: str, table: dict, wet_depth: float) -> Probe:
    where = f"probes.{name}"
    kind = _get(table, "kind", where, str)
    if kind == "point":
        return Point(_get(table, "x", where, float), _get(table, "y", where, float))
    if kind in ("area_mean", "area_max"):
        cls = AreaMean if kind == "area_mean" else AreaMax
        if "rect" in table:
            rect = tuple(float(v) for v in _get(table, "rect", where, list))
            if len(rect) != 4 or rect[0] > rect[1] or rect[2] > rect[3]:
                raise ConfigError(f"{where}.rect must be [x0, x1, y0, y1] with x0 <= x1, y0 <= y1")
            return cls(rect=rect)
        poly = _get(table, "polygon", where, list)
        if len(poly) < 3:
            raise ConfigError(f"{where}.polygon needs at least 3 vertices")
        return cls(polygon=tuple((float(x), float(y)) for x, y in poly))
    if kind == "full_map":
        return FullMap(wet_depth=_get(table, "wet_depth", where, float, wet_depth))
    raise ConfigError(f"{where}.kind {kind!r} is not point, area_mean, area_max or full_map")


def _boundaries(table: dict, where: str):
    out = {}
    inflow_side = None
    for side, value in table.items():
        if side not in SIDES:
            raise ConfigError(f"{where}.{side} is not one of {', '.join(SIDES)}")
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            out[side] = ImposedDepth(float(value))
        elif value == "wall":
            out[side] = Wall()
        elif value == "outflow":
            out[side] = FreeOutflow()
        elif value == "inflow":
            if inflow_side is not None:
                raise ConfigError(f"{where}: only one inflow side is supported")
            inflow_side = side
        else:
            raise ConfigError(f"{where}.{side} must be wall, outflow, inflow or a depth")
    return out, inflow_side


def _scenario(table: dict, base: Path) -> tuple[HydraulicScenario, dict]:
    where = "scenario"
    t_end = _get(table, "t_end", where, float)
    if t_end < 0:
        raise ConfigError("scenario.t_end must be >= 0")
    bcs, inflow_side = _boundaries(_get(table, "boundaries", where, dict, {}), "scenario.boundaries")
    inflow = None
    if inflow_side is not None:
        if "discharge" in table:
            q = _get(table, "discharge", where, float)
            inflow = Hydrograph((0.0,), (q,))
        else:
            times = _get(table, "hydrograph_times", where, list)
            values = _get(table, "hydrograph_discharge", where, list)
            try:
                inflow = Hydrograph(tuple(map(float, times)), tuple(map(float, values)))
            except ValueError as exc:
                raise ConfigError(f"scenario hydrograph: {exc}") from None
        bcs[inflow_side] = ImposedDischarge(0.0)
    inlet = _get(table, "inlet", where, list, None)
    if inlet is not None:
        if len(inlet) != 2 or float(inlet[0]) >= float(inlet[1]):
            raise ConfigError("scenario.inlet must be [start, end] with start < end")
        inlet = (float(inlet[0]), float(inlet[1]))
    try:
        solver = SolverConfig(
            flux_scheme=_get(table, "flux_scheme", where, str, "hll"),
            order=_get(table, "order", where, int, 1),
            cfl=_get(table, "cfl", where, float, 0.5),
            dt_max=_get(table, "dt_max", where, float, 1.0),
            max_steps=_get(table, "max_steps", where, int, 10**8),
            sample_interval=_get(table, "sample_interval", where, float, 1.0),
            boundaries=bcs,
        )
        law = _get(table, "friction", where, str, "manning")
        coef = _get(table, "friction_coefficient", where, float, 0.03 if law != "none" else 0.0)
        friction = FrictionModel(law, coef)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    structures = {
        str(level): _path(base, _get({"p": p}, "p", f"scenario.structures.{level}", str),
                          f"scenario.structures.{level}")
        for level, p in _get(table, "structures", where, dict, {}).items()
    }
    dem = table.get("dem")
    dem = _path(base, dem, "scenario.dem") if dem is not None else None
    depth = table.get("initial_depth")
    depth = _path(base, depth, "scenario.initial_depth") if depth is not None else None
    level = _get(table, "initial_level", where, float, None)
    if depth is not None and level is not None:
        raise ConfigError("scenario.initial_depth and scenario.initial_level are exclusive")
    sc = HydraulicScenario(
        t_end=t_end, solver=solver, friction=friction, inflow=inflow, inflow_side=inflow_side,
        inlet=inlet, initial_level=level, initial_depth=depth, dem=dem,
        wet_depth=_get(table, "wet_depth", where, float, 0.01),
    )
    if dem is not None and not structures:
        structures = {"S1": dem}
    return sc, structures


KNOWN_SECTIONS = ("parameters", "scenario", "probes", "campaign")


def parse_study(data: dict, base: Path | str = ".", source: Path | None = None) -> StudyConfig:
    base = Path(base)
    for key in data:
        if key not in KNOWN_SECTIONS:
            raise ConfigError(f"unknown section [{key}]; expected {', '.join(KNOWN_SECTIONS)}")
    scenario, structures = _scenario(_get(data, "scenario", "config", dict), base)
    params = [
        _parameter(name, _get({"t": t}, "t", f"parameters.{name}", dict))
        for name, t in data.get("parameters", {}).items()
    ]
    probes = {
        name: _probe(name, _get({"t": t}, "t", f"probes.{name}", dict), scenario.wet_depth)
        for name, t in data.get("probes", {}).items()
    }
    camp = data.get("campaign", {})
    cfg = StudyConfig(
        parameters=params,
        scenario=scenario,
        structures=structures,
        probes=probes,
        n=_get(camp, "n", "campaign", int, 64),
        seed=_get(camp, "seed", "campaign", int, 0),
        max_workers=_get(camp, "max_workers", "campaign", int, DEFAULT_MAX_WORKERS),
        retries=_get(camp, "retries", "campaign", int, 1),
        source=source,
    )
    return cfg


def load_study(path: str | os.PathLike) -> StudyConfig:
    """Parse and validate a study file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} does not exist") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = parse_study(data, path.parent, path.resolve())
    try:
        cfg.validate()
    except OSError as exc:
        raise ConfigError(f"reading DEM: {exc}") from None
    return cfg


def read_initial_depth(scenario: HydraulicScenario) -> Raster | None:
    if scenario.initial_depth is None:
        return None
    return read_ascii_grid(scenario.initial_depth)
