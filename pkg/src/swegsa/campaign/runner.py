"""Campaign execution: bounded worker pool, durable records, resume."""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..gsa.sampling import SampleDesign
from ..io import Raster, read_ascii_grid, read_csv, write_ascii_grid, write_csv
from ..swe.state import NonFiniteError
from .config import StudyConfig
from .probes import FullMap, extract_output
from .scenario import Scenario, realize_scenario, simulate_scenario
from .store import DONE, FAILED, RUNNING, RecordLog, RunRecord

LOG_NAME = "records.jsonl"
RESULTS_NAME = "results.csv"
MAPS_DIR = "maps"
OUTPUT_PREFIX = "y_"
BASE_COLUMNS = ("run_id", "block", "row")


class CampaignIncomplete(RuntimeError):
    """Some runs are not Done after the retry budget."""

    def __init__(self, message: str, report: "CampaignReport"):
        super().__init__(message)
        self.report = report


class StoreNotEmpty(RuntimeError):
    """The store already holds records and resume was not requested."""


@dataclass
class CampaignReport:
    columns: list[str]
    rows: list[dict]
    executed: int = 0
    skipped: int = 0
    failed: list[str] = field(default_factory=list)
    high_water: int = 0
    max_overlap: int = 0
    store: Path | None = None

    @property
    def complete(self) -> bool:
        return not self.failed


def run_id(block: str, row: int) -> str:
    return f"{block}-{row:05d}"


def _exit_with_parent(parent: int, poll: float = 1.0) -> None:
    """Pool initializer: a worker orphaned by a killed campaign exits on its own."""

    def watch():
        while os.getppid() == parent:
            time.sleep(poll)
        os._exit(1)

    threading.Thread(target=watch, daemon=True).start()


def _execute(scenario: Scenario, probes: dict, analysis_grid) -> dict:
    """Worker entry point: simulate and extract every probe."""
    t0 = time.time()
    sim = simulate_scenario(scenario)
    outputs = {}
    for name, probe in probes.items():
        if isinstance(probe, FullMap):
            probe = replace(probe, grid=analysis_grid)
        outputs[name] = extract_output(sim, probe)
    return {"outputs": outputs, "start": t0, "end": time.time(), "pid": os.getpid()}


def _max_overlap(intervals) -> int:
    events = sorted([(s, 1) for s, _ in intervals] + [(e, -1) for _, e in intervals])
    best = cur = 0
    for _, d in events:
        cur += d
        best = max(best, cur)
    return best


def map_path(store: Path, rid: str, probe: str) -> Path:
    return store / MAPS_DIR / f"{rid}.{probe}.asc"


def _store_outputs(store: Path, rid: str, outputs: dict) -> dict:
    """Write map rasters atomically; returns JSON-ready outputs."""
    out = {}
    for name, value in outputs.items():
        if isinstance(value, Raster):
            path = map_path(store, rid, name)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            write_ascii_grid(value, tmp)
            os.replace(tmp, path)
            out[name] = str(path.relative_to(store))
        else:
            out[name] = float(value)
    return out


def _usable(rec: RunRecord | None, checksum: str, store: Path, probes: dict) -> bool:
    if rec is None or rec.status != DONE or rec.checksum != checksum:
        return False
    if set(rec.outputs) != set(probes):
        return False
    return all(
        (store / rec.outputs[name]).exists()
        for name, p in probes.items()
        if isinstance(p, FullMap)
    )


def result_columns(config: StudyConfig) -> list[str]:
    return (list(BASE_COLUMNS) + [s.param.name for s in config.parameters]
            + [OUTPUT_PREFIX + name for name in config.probes])


def run_campaign(config: StudyConfig, design: SampleDesign, store, max_workers: int | None = None,
                 resume: bool = True, on_record=None) -> CampaignReport:
    """Execute all n(p+2) runs of ``design`` and write the result table.

    At most ``max_workers`` simulations run at once. Every state change is
    appended to ``store/records.jsonl``; with ``resume`` a restarted
    campaign skips runs whose Done record matches the scenario checksum.
    ``on_record(record)`` is called after each append (test hook).
    """
    store = Path(store)
    workers = config.max_workers if max_workers is None else int(max_workers)
    if workers < 1:
        raise ValueError(f"max_workers must be >= 1, got {workers}")
    if design.names != [s.param.name for s in config.parameters]:
        raise ValueError(f"design parameters {design.names} do not match the study "
                         f"{[s.param.name for s in config.parameters]}")
    store.mkdir(parents=True, exist_ok=True)
    log = RecordLog(store / LOG_NAME)
    previous = log.latest()
    if previous and not resume:
        raise StoreNotEmpty(f"{store} already holds {len(previous)} run records; resume or use an empty store")

    grid = config.analysis_grid
    columns = result_columns(config)
    order, rows, todo = [], {}, []
    report = CampaignReport(columns, [], store=store)
    for block, r, values in design.rows():
        rid = run_id(block, r)
        sc = realize_scenario(values, config, rid, block, r)
        order.append(rid)
        rows[rid] = {"run_id": rid, "block": block, "row": r, **sc.values}
        rec = previous.get(rid)
        if _usable(rec, sc.checksum, store, config.probes):
            rows[rid].update({OUTPUT_PREFIX + k: v for k, v in rec.outputs.items()})
            report.skipped += 1
        else:
            todo.append((rid, values))

    def emit(rec: RunRecord):
        log.append(rec)
        if on_record is not None:
            on_record(rec)

    def finish(rid, checksum, attempt, result=None, exc=None) -> bool:
        """Record one attempt; returns True if the run should be retried."""
        if exc is None:
            outputs = _store_outputs(store, rid, result["outputs"])
            rows[rid].update({OUTPUT_PREFIX + k: v for k, v in outputs.items()})
            intervals.append((result["start"], result["end"]))
            emit(RunRecord(rid, DONE, checksum, outputs, result["end"] - result["start"],
                           None, attempt))
            report.executed += 1
            return False
        emit(RunRecord(rid, FAILED, checksum, {}, 0.0, f"{type(exc).__name__}: {exc}", attempt))
        return not isinstance(exc, NonFiniteError) and attempt < config.retries

    intervals: list[tuple[float, float]] = []
    failed = set()
    try:
        if workers == 1:
            for rid, values in todo:
                block, r = rows[rid]["block"], rows[rid]["row"]
                for attempt in range(config.retries + 1):
                    sc = realize_scenario(values, config, rid, block, r)
                    emit(RunRecord(rid, RUNNING, sc.checksum, attempt=attempt))
                    report.high_water = max(report.high_water, 1)
                    try:
                        result = _execute(sc, config.probes, grid)
                    except Exception as exc:  # noqa: BLE001 - recorded, campaign continues
                        if finish(rid, sc.checksum, attempt, exc=exc):
                            continue
                        failed.add(rid)
                        break
                    finish(rid, sc.checksum, attempt, result)
                    break
        else:
            queue = [(rid, values, 0) for rid, values in todo]
            queue.reverse()
            in_flight = {}
            with ProcessPoolExecutor(max_workers=workers, initializer=_exit_with_parent,
                                     initargs=(os.getpid(),)) as pool:
                while queue or in_flight:
                    while queue and len(in_flight) < workers:
                        rid, values, attempt = queue.pop()
                        block, r = rows[rid]["block"], rows[rid]["row"]
                        sc = realize_scenario(values, config, rid, block, r)
                        emit(RunRecord(rid, RUNNING, sc.checksum, attempt=attempt))
                        fut = pool.submit(_execute, sc, config.probes, grid)
                        in_flight[fut] = (rid, values, attempt, sc.checksum)
                        report.high_water = max(report.high_water, len(in_flight))
                    done, _ = wait(list(in_flight), return_when=FIRST_COMPLETED)
                    for fut in sorted(done, key=lambda f: in_flight[f][0]):
                        rid, values, attempt, checksum = in_flight.pop(fut)
                        exc = fut.exception()
                        if exc is None:
                            finish(rid, checksum, attempt, fut.result())
                        elif finish(rid, checksum, attempt, exc=exc):
                            queue.append((rid, values, attempt + 1))
                        else:
                            failed.add(rid)
    finally:
        log.close()

    report.max_overlap = _max_overlap(intervals)
    report.rows = [rows[rid] for rid in order]
    report.failed = sorted(failed)
    if failed:
        raise CampaignIncomplete(
            f"{len(failed)} of {len(order)} runs failed after retries: {', '.join(report.failed[:5])}",
            report,
        )
    write_csv(store / RESULTS_NAME, columns, report.rows)
    return report


# --- reading results back ----------------------------------------------------


@dataclass
class CampaignResults:
    """A result table split into the pick-freeze blocks."""

    columns: list[str]
    rows: list[dict]
    base: Path

    @classmethod
    def from_csv(cls, path) -> "CampaignResults":
        path = Path(path)
        table = read_csv(path)
        missing = [c for c in BASE_COLUMNS if c not in table.columns]
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(missing)}")
        return cls(list(table.columns), table.rows, path.parent)

    @property
    def outputs(self) -> list[str]:
        return [c[len(OUTPUT_PREFIX):] for c in self.columns if c.startswith(OUTPUT_PREFIX)]

    @property
    def params(self) -> list[str]:
        return [c for c in self.columns
                if c not in BASE_COLUMNS and not c.startswith(OUTPUT_PREFIX)]

    def block(self, label: str) -> list[dict]:
        rows = sorted((r for r in self.rows if r["block"] == label), key=lambda r: r["row"])
        if not rows:
            raise ValueError(f"result table has no rows in block {label}")
        if [r["row"] for r in rows] != list(range(len(rows))):
            raise ValueError(f"block {label} rows are not 0..n-1")
        return rows

    def is_map(self, output: str) -> bool:
        first = self.rows[0][OUTPUT_PREFIX + output]
        return isinstance(first, str) and first.endswith(".asc")

    def _values(self, rows, output: str):
        col = OUTPUT_PREFIX + output
        if self.is_map(output):
            return np.stack([read_ascii_grid(self.base / r[col]).values for r in rows])
        vals = [r[col] for r in rows]
        if any(v is None or isinstance(v, str) for v in vals):
            raise ValueError(f"output {output} has missing or non-numeric values")
        return np.asarray(vals, dtype=np.float64)

    def map_grid(self, output: str):
        return read_ascii_grid(self.base / self.rows[0][OUTPUT_PREFIX + output]).grid

    def pick_freeze(self, output: str, params=None):
        """(y_a, y_b, y_ab) arrays for ``output`` in design layout."""
        params = self.params if params is None else list(params)
        if output not in self.outputs:
            raise KeyError(f"unknown output {output!r}; known: {', '.join(self.outputs)}")
        y_a = self._values(self.block("A"), output)
        y_b = self._values(self.block("B"), output)
        y_ab = np.stack([self._values(self.block(f"AB{i + 1}"), output) for i in range(len(params))])
        return y_a, y_b, y_ab
