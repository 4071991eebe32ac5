"""Convergence series, histograms and scatter tables of campaign outputs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import _as_arrays, _indices

Z95 = 1.96


@dataclass
class ConvergencePoint:
    n: int
    mean: float
    half_width: float
    first_order: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class ConvergenceSeries:
    points: list[ConvergencePoint]

    COLUMNS_BASE = ("N", "mean", "ci_lo", "ci_hi", "half_width")

    def rows(self, names=()) -> list[dict]:
        out = []
        for pt in self.points:
            row = {
                "N": pt.n,
                "mean": pt.mean,
                "ci_lo": pt.mean - pt.half_width,
                "ci_hi": pt.mean + pt.half_width,
                "half_width": pt.half_width,
            }
            for name, s in zip(names, pt.first_order):
                row[f"S1_{name}"] = float(s)
            out.append(row)
        return out


def convergence_series(outputs, checkpoints, y_b=None, y_ab=None) -> ConvergenceSeries:
    """Running mean and 95% half-width ``1.96 s / sqrt(N)`` at each checkpoint.

    ``outputs`` are the i.i.d. base-sample outputs (the A block). When the
    B and A_B blocks are also given, first-order indices are recomputed on
    the design truncated to the first N rows.
    """
    y = np.asarray(outputs, dtype=np.float64)
    n = y.shape[0]
    cps = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if cps and (cps[0] < 2 or cps[-1] > n):
        raise ValueError(f"checkpoints must lie in [2, {n}]")
    with_indices = y_b is not None and y_ab is not None
    if with_indices:
        y, y_b, y_ab = _as_arrays(y, y_b, y_ab)
    points = []
    for c in cps:
        head = y[:c]
        s = head.std(ddof=1)
        first = np.empty(0)
        if with_indices:
            first = _indices(head, y_b[:c], y_ab[:, :c])[0]
        points.append(ConvergencePoint(c, float(head.mean()), float(Z95 * s / np.sqrt(c)), first))
    return ConvergenceSeries(points)


def default_checkpoints(n: int, count: int = 8) -> list[int]:
    """Roughly geometric checkpoints from 2 up to n."""
    cps = np.unique(np.geomspace(2, n, num=min(count, n - 1)).round().astype(int))
    return [int(c) for c in cps]


def histogram(outputs, bins: int = 20, range=None):
    """Bin edges and counts; bins are left-closed, the last one closed."""
    y = np.asarray(outputs, dtype=np.float64).ravel()
    if y.size == 0:
        raise ValueError("histogram of an empty output sample")
    counts, edges = np.histogram(y, bins=bins, range=range)
    return edges, counts


def scatter(param_column, outputs) -> np.ndarray:
    """Paired (parameter value, output) table, shape (n, 2)."""
    x = np.asarray(param_column, dtype=np.float64).ravel()
    y = np.asarray(outputs, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"{x.size} parameter values for {y.size} outputs")
    if x.size == 0:
        raise ValueError("scatter of an empty output sample")
    return np.column_stack([x, y])


def correlation(table: np.ndarray) -> float:
    return float(np.corrcoef(table[:, 0], table[:, 1])[0, 1])
