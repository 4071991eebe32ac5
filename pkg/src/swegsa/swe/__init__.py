"""Finite-volume shallow-water solver on a structured grid."""

from .solver import run_simulation, stable_timestep, step
from .state import (
    FlowState,
    FreeOutflow,
    FrictionModel,
    Hydrograph,
    ImposedDepth,
    ImposedDischarge,
    NonFiniteError,
    Periodic,
    SimulationOutput,
    SimulationTimeout,
    SolverConfig,
    Topography,
    Wall,
)

__all__ = [
    "FlowState", "FreeOutflow", "FrictionModel", "Hydrograph", "ImposedDepth", "ImposedDischarge",
    "NonFiniteError", "Periodic", "SimulationOutput", "SimulationTimeout", "SolverConfig",
    "Topography", "Wall", "run_simulation", "stable_timestep", "step",
]
