"""Input distributions, pick-freeze designs and Sobol index estimators."""

from .diagnostics import convergence_series, histogram, scatter
from .distributions import Categorical, DiscreteUniform, InputParameter, Normal, Triangular, Uniform
from .estimators import (
    DegenerateVariance,
    SobolResult,
    analyze,
    bootstrap_ci,
    estimate_first_order,
    estimate_total_order,
)
from .maps import SobolMap, sobol_map
from .sampling import SampleDesign, sample

__all__ = [
    "Categorical", "DegenerateVariance", "DiscreteUniform", "InputParameter", "Normal",
    "SampleDesign", "SobolMap", "SobolResult", "Triangular", "Uniform", "analyze", "bootstrap_ci",
    "convergence_series", "estimate_first_order", "estimate_total_order", "histogram", "sample",
    "scatter", "sobol_map",
]
