"""First- and total-order Sobol indices from pick-freeze outputs.

Output arrays follow the design layout: ``y_a`` and ``y_b`` have shape
``(n, ...)`` and ``y_ab`` has shape ``(p, n, ...)``; any trailing axes
(map cells, for instance) are estimated independently.

First order uses the Saltelli (2010) estimator
``mean(y_B * (y_ABi - y_A)) / Var(Y)`` and total order the Jansen (1999)
estimator ``mean((y_A - y_ABi)^2) / (2 Var(Y))``. Outputs are centred on
the pooled A/B mean first, which makes both estimators invariant to affine
rescaling of Y; ``Var(Y)`` is the pooled A/B variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REPORT_RANGE = (-0.1, 1.1)


class DegenerateVariance(ArithmeticError):
    """Output variance below the floor; indices are undefined."""


def variance_floor(mean):
    return 1e-12 * (1.0 + np.square(mean))


def _as_arrays(y_a, y_b, y_ab):
    y_a = np.asarray(y_a, dtype=np.float64)
    y_b = np.asarray(y_b, dtype=np.float64)
    y_ab = np.asarray(y_ab, dtype=np.float64)
    if y_a.shape != y_b.shape:
        raise ValueError(f"y_a {y_a.shape} and y_b {y_b.shape} differ in shape")
    if y_ab.ndim == y_a.ndim:
        y_ab = y_ab[None]
    if y_ab.shape[1:] != y_a.shape:
        raise ValueError(f"y_ab shape {y_ab.shape} does not match (p,) + {y_a.shape}")
    return y_a, y_b, y_ab


def _moments(y_a, y_b):
    mean = 0.5 * (y_a.mean(axis=0) + y_b.mean(axis=0))
    ca = y_a - mean
    cb = y_b - mean
    var = 0.5 * (np.mean(ca * ca, axis=0) + np.mean(cb * cb, axis=0))
    return mean, var, ca, cb


def _indices(y_a, y_b, y_ab):
    """Raw (first, total, var, mean, degenerate) without raising."""
    mean, var, ca, cb = _moments(y_a, y_b)
    cab = y_ab - mean
    degenerate = var < variance_floor(mean)
    safe = np.where(degenerate, 1.0, var)
    diff = cab - ca
    first = np.mean(cb * diff, axis=1) / safe
    total = 0.5 * np.mean(diff * diff, axis=1) / safe
    first = np.where(degenerate, np.nan, first)
    total = np.where(degenerate, np.nan, total)
    return first, total, var, mean, degenerate


def _check_scalar(degenerate, var):
    if np.any(degenerate):
        raise DegenerateVariance(f"output variance {np.min(var):.3g} is below the variance floor")


def estimate_first_order(y_a, y_b, y_ab) -> np.ndarray:
    """Raw first-order indices, shape ``(p, ...)``."""
    first, _, var, _, degenerate = _indices(*_as_arrays(y_a, y_b, y_ab))
    _check_scalar(degenerate, var)
    return first


def estimate_total_order(y_a, y_b, y_ab) -> np.ndarray:
    """Raw total-order indices, shape ``(p, ...)``."""
    _, total, var, _, degenerate = _indices(*_as_arrays(y_a, y_b, y_ab))
    _check_scalar(degenerate, var)
    return total


MIN_BOOTSTRAP_ROWS = 50


def clamp(x):
    return np.clip(x, *REPORT_RANGE)


def bootstrap_ci(y_a, y_b, y_ab, level: float = 0.95, resamples: int = 1000, seed: int = 0):
    """Percentile bootstrap intervals for first and total indices.

    Rows are resampled jointly across A, B and every A_B^(i). Returns two
    arrays of shape ``(p, 2)`` (first, total) widened if needed so that they
    contain the full-sample estimate.
    """
    y_a, y_b, y_ab = _as_arrays(y_a, y_b, y_ab)
    if y_a.ndim != 1:
        raise ValueError("bootstrap_ci expects scalar outputs (1-D y_a)")
    n = y_a.shape[0]
    if n < MIN_BOOTSTRAP_ROWS:
        raise ValueError(f"bootstrap needs n >= {MIN_BOOTSTRAP_ROWS} rows, got {n}")
    if not 0 < level < 1:
        raise ValueError(f"level must be in (0, 1), got {level}")
    first0, total0, var, _, degenerate = _indices(y_a, y_b, y_ab)
    _check_scalar(degenerate, var)

    rng = np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))
    p = y_ab.shape[0]
    firsts = np.empty((resamples, p))
    totals = np.empty((resamples, p))
    chunk = max(1, min(resamples, (1 << 22) // max(n * (p + 2), 1)))
    for start in range(0, resamples, chunk):
        stop = min(resamples, start + chunk)
        idx = rng.integers(0, n, size=(stop - start, n))
        ya = y_a[idx].T  # (n, r)
        yb = y_b[idx].T
        yab = y_ab[:, idx].transpose(0, 2, 1)  # (p, n, r)
        f, t, *_ = _indices(ya, yb, yab)
        firsts[start:stop] = f.T
        totals[start:stop] = t.T
    alpha = 100.0 * (1.0 - level) / 2.0
    out = []
    for draws, point in ((firsts, first0), (totals, total0)):
        lo = np.nanpercentile(draws, alpha, axis=0)
        hi = np.nanpercentile(draws, 100.0 - alpha, axis=0)
        out.append(np.column_stack([np.minimum(lo, point), np.maximum(hi, point)]))
    return out[0], out[1]


@dataclass
class SobolResult:
    """Indices for one scalar output.

    ``first``/``total`` are clamped to the report range; the ``*_raw``
    fields keep the unclamped estimates. Degenerate results carry NaN.
    """

    names: list[str]
    first: np.ndarray
    total: np.ndarray
    first_raw: np.ndarray
    total_raw: np.ndarray
    first_ci: np.ndarray
    total_ci: np.ndarray
    variance: float
    mean: float
    n: int
    degenerate: bool

    COLUMNS = ("param", "S1", "S1_lo", "S1_hi", "ST", "ST_lo", "ST_hi",
               "varY", "n", "degenerate", "S1_raw", "ST_raw")

    def rows(self) -> list[dict]:
        out = []
        for i, name in enumerate(self.names):
            out.append({
                "param": name,
                "S1": self.first[i],
                "S1_lo": self.first_ci[i, 0],
                "S1_hi": self.first_ci[i, 1],
                "ST": self.total[i],
                "ST_lo": self.total_ci[i, 0],
                "ST_hi": self.total_ci[i, 1],
                "varY": self.variance,
                "n": self.n,
                "degenerate": self.degenerate,
                "S1_raw": self.first_raw[i],
                "ST_raw": self.total_raw[i],
            })
        return out


def analyze(names, y_a, y_b, y_ab, level: float = 0.95, resamples: int = 1000,
            seed: int = 0) -> SobolResult:
    """Point estimates plus bootstrap intervals; flags instead of raising.

    Intervals are NaN when ``resamples`` is 0 or the design has fewer rows
    than the bootstrap needs.
    """
    y_a, y_b, y_ab = _as_arrays(y_a, y_b, y_ab)
    names = list(names)
    if len(names) != y_ab.shape[0]:
        raise ValueError(f"{len(names)} names for {y_ab.shape[0]} A_B blocks")
    for label, arr in (("y_a", y_a), ("y_b", y_b), ("y_ab", y_ab)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{label} contains non-finite outputs")
    first, total, var, mean, degenerate = _indices(y_a, y_b, y_ab)
    p = len(names)
    if degenerate:
        nan_ci = np.full((p, 2), np.nan)
        return SobolResult(names, first, total, first, total, nan_ci, nan_ci.copy(),
                           float(var), float(mean), y_a.shape[0], True)
    if resamples > 0 and y_a.shape[0] >= MIN_BOOTSTRAP_ROWS:
        first_ci, total_ci = bootstrap_ci(y_a, y_b, y_ab, level, resamples, seed)
    else:
        first_ci = np.full((p, 2), np.nan)
        total_ci = np.full((p, 2), np.nan)
    return SobolResult(
        names, clamp(first), clamp(total), first, total, clamp(first_ci), clamp(total_ci),
        float(var), float(mean), y_a.shape[0], False,
    )
