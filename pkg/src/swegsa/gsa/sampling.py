"""Pick-freeze sample designs driven by a counter-based uniform stream.

Every column of A and B reads its own Philox stream, selected by the top
word of the counter, so a design is a pure function of (parameters, n,
seed), the first m rows of a size-n design equal the size-m design, and
columns can be generated independently in any order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .distributions import (
    InputParameter,
    check_unique,
    distribution_from_dict,
    distribution_to_dict,
)

_SEED_MASK = (1 << 64) - 1


def uniform_stream(seed: int, stream: int, n: int, start: int = 0) -> np.ndarray:
    """``n`` uniforms in the open interval (0, 1) from stream ``stream``.

    ``start`` skips that many draws, so slices of a stream can be produced
    separately and concatenated.
    """
    counter = np.array([0, 0, 0, stream], dtype=np.uint64)
    bitgen = np.random.Philox(counter=counter, key=int(seed) & _SEED_MASK)
    if start:
        bitgen.advance(start // 4)
        skip = start % 4
        if skip:
            bitgen.random_raw(skip)
    raw = bitgen.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(eq=False)
class SampleDesign:
    """Matrices A and B (n x p); A_B^(i) is A with column i taken from B."""

    params: tuple[InputParameter, ...]
    seed: int
    A: np.ndarray
    B: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [q.name for q in self.params]

    @property
    def n_runs(self) -> int:
        return self.n * (self.p + 2)

    def ab(self, i: int) -> np.ndarray:
        m = self.A.copy()
        m[:, i] = self.B[:, i]
        return m

    def blocks(self) -> Iterator[tuple[str, np.ndarray]]:
        """Run blocks in campaign order: A, B, then AB1 .. ABp."""
        yield "A", self.A
        yield "B", self.B
        for i in range(self.p):
            yield f"AB{i + 1}", self.ab(i)

    def rows(self) -> Iterator[tuple[str, int, np.ndarray]]:
        for label, m in self.blocks():
            for r in range(self.n):
                yield label, r, m[r]

    def truncated(self, n: int) -> "SampleDesign":
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot truncate a design of {self.n} rows to {n}")
        return SampleDesign(self.params, self.seed, self.A[:n].copy(), self.B[:n].copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleDesign):
            return NotImplemented
        return (
            self.params == other.params
            and self.seed == other.seed
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
        )

    # persistence -----------------------------------------------------------

    def save(self, directory: str | os.PathLike) -> None:
        """Write ``design.json`` (exact hex floats) into ``directory``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        meta = {
            "seed": int(self.seed),
            "n": self.n,
            "parameters": [
                {"name": q.name, **distribution_to_dict(q.distribution)} for q in self.params
            ],
            "A": [[float(x).hex() for x in row] for row in self.A],
            "B": [[float(x).hex() for x in row] for row in self.B],
        }
        (d / "design.json").write_text(json.dumps(meta, indent=1) + "\n")

    @classmethod
    def load(cls, directory: str | os.PathLike) -> "SampleDesign":
        path = Path(directory) / "design.json"
        meta = json.loads(path.read_text())
        params = tuple(
            InputParameter(spec["name"], distribution_from_dict({k: v for k, v in spec.items() if k != "name"}))
            for spec in meta["parameters"]
        )
        p = len(params)
        A = np.array([[float.fromhex(x) for x in row] for row in meta["A"]], dtype=np.float64).reshape(-1, p)
        B = np.array([[float.fromhex(x) for x in row] for row in meta["B"]], dtype=np.float64).reshape(-1, p)
        return cls(params, int(meta["seed"]), A, B)


def sample(params: Sequence[InputParameter], n: int, seed: int) -> SampleDesign:
    """Independent matrices A and B of ``n`` joint draws each."""
    params = tuple(params)
    if n < 2:
        raise ValueError(f"base sample size must be >= 2, got {n}")
    if not params:
        raise ValueError("at least one parameter is required")
    check_unique(params)
    p = len(params)
    A = np.empty((n, p))
    B = np.empty((n, p))
    for j, q in enumerate(params):
        A[:, j] = q.distribution.ppf(uniform_stream(seed, 2 * j, n))
        B[:, j] = q.distribution.ppf(uniform_stream(seed, 2 * j + 1, n))
    return SampleDesign(params, int(seed), A, B)
