"""Shallow-water flood ensembles and variance-based sensitivity analysis."""

__version__ = "0.1.0"
