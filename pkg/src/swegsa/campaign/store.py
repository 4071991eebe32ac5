"""Append-only JSON-lines log of run records."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

PENDING, RUNNING, DONE, FAILED = "Pending", "Running", "Done", "Failed"
STATUSES = (PENDING, RUNNING, DONE, FAILED)


@dataclass
class RunRecord:
    run_id: str
    status: str
    checksum: str
    outputs: dict = field(default_factory=dict)
    wall: float = 0.0
    error: str | None = None
    attempt: int = 0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown run status {self.status!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))


class RecordLog:
    """Single-writer log; every append is flushed and fsynced.

    A torn final line (the writer died mid-append) is ignored on read and
    cut off before the next append.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._fh = None

    def read(self) -> list[RunRecord]:
        if not self.path.exists():
            return []
        lines = self.path.read_text().split("\n")
        records = []
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(RunRecord.from_json(line))
            except (ValueError, TypeError):
                if i == len(lines) - 1:  # torn tail, no newline yet
                    break
                raise ValueError(f"{self.path}:{i + 1}: corrupt record") from None
        return records

    def latest(self) -> dict[str, RunRecord]:
        out = {}
        for rec in self.read():
            out[rec.run_id] = rec
        return out

    def append(self, record: RunRecord) -> None:
        if self._fh is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                data = self.path.read_bytes()
                keep = data.rfind(b"\n") + 1
                if keep != len(data):  # drop the torn partial record
                    with open(self.path, "r+b") as fh:
                        fh.truncate(keep)
            self._fh = open(self.path, "a")
        self._fh.write(record.to_json() + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "RecordLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
