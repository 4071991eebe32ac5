"""Marginal distributions of uncertain inputs, sampled by inverse CDF."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri


class InvalidDistribution(ValueError):
    """Distribution parameters violate their constraints."""


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma)) or self.sigma <= 0:
            raise InvalidDistribution(f"Normal needs finite mu and sigma > 0, got {self}")

    def ppf(self, u):
        return self.mu + self.sigma * ndtri(u)


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise InvalidDistribution(f"Uniform needs a < b, got {self}")

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)


@dataclass(frozen=True)
class Triangular:
    a: float
    mode: float
    b: float

    def __post_init__(self):
        if not self.a < self.b or not self.a <= self.mode <= self.b:
            raise InvalidDistribution(f"Triangular needs a <= mode <= b and a < b, got {self}")

    def ppf(self, u):
        u = np.asarray(u, dtype=np.float64)
        a, c, b = self.a, self.mode, self.b
        split = (c - a) / (b - a)
        left = a + np.sqrt(u * (b - a) * (c - a))
        right = b - np.sqrt((1.0 - u) * (b - a) * (b - c))
        return np.where(u < split, left, right)


@dataclass(frozen=True)
class DiscreteUniform:
    """Equiprobable numeric levels."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2 or len(set(vals)) != len(vals):
            raise InvalidDistribution(f"DiscreteUniform needs >= 2 distinct values, got {vals}")
        object.__setattr__(self, "values", vals)

    def ppf(self, u):
        k = len(self.values)
        idx = np.minimum((np.asarray(u) * k).astype(np.int64), k - 1)
        return np.asarray(self.values)[idx]


@dataclass(frozen=True)
class Categorical:
    """Equiprobable labels; samples are the integer codes 0..k-1 as floats."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(v) for v in self.labels)
        if len(labels) < 2 or len(set(labels)) != len(labels):
            raise InvalidDistribution(f"Categorical needs >= 2 distinct labels, got {labels}")
        object.__setattr__(self, "labels", labels)

    def ppf(self, u):
        k = len(self.labels)
        return np.minimum((np.asarray(u) * k).astype(np.int64), k - 1).astype(np.float64)

    def label(self, code) -> str:
        return self.labels[int(code)]


Distribution = Union[Normal, Uniform, Triangular, DiscreteUniform, Categorical]


@dataclass(frozen=True)
class InputParameter:
    """Named independent random input X_i."""

    name: str
    distribution: Distribution

    def __post_init__(self):
        if not self.name or not str(self.name).isidentifier():
            raise InvalidDistribution(f"parameter name must be an identifier, got {self.name!r}")


def check_unique(params) -> None:
    names = [p.name for p in params]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise InvalidDistribution(f"duplicate parameter names: {', '.join(dupes)}")


def distribution_to_dict(dist: Distribution) -> dict:
    kind = type(dist).__name__.lower()
    if isinstance(dist, Normal):
        return {"kind": kind, "mu": dist.mu, "sigma": dist.sigma}
    if isinstance(dist, Uniform):
        return {"kind": kind, "a": dist.a, "b": dist.b}
    if isinstance(dist, Triangular):
        return {"kind": kind, "a": dist.a, "mode": dist.mode, "b": dist.b}
    if isinstance(dist, DiscreteUniform):
        return {"kind": "discrete", "values": list(dist.values)}
    return {"kind": kind, "labels": list(dist.labels)}


def distribution_from_dict(spec: dict) -> Distribution:
    """Build a distribution from ``{"kind": ..., <parameters>}``."""
    spec = dict(spec)
    kind = str(spec.pop("kind", "")).lower()
    try:
        if kind == "normal":
            return Normal(float(spec["mu"]), float(spec["sigma"]))
        if kind == "uniform":
            return Uniform(float(spec["a"]), float(spec["b"]))
        if kind == "triangular":
            return Triangular(float(spec["a"]), float(spec["mode"]), float(spec["b"]))
        if kind in ("discrete", "discrete_uniform"):
            return DiscreteUniform(tuple(spec["values"]))
        if kind == "categorical":
            return Categorical(tuple(spec["labels"]))
    except KeyError as exc:
        raise InvalidDistribution(f"{kind} distribution is missing {exc.args[0]!r}") from None
    raise InvalidDistribution(f"unknown distribution kind {kind!r}")
