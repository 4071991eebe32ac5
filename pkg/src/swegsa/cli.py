"""Command-line interface: simulate, sample, run, analyze and map.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure
(non-finite state), 4 campaign left incomplete after retries.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .campaign.config import ConfigError, load_study, read_initial_depth
from .campaign.probes import FullMap, extract_output
from .campaign.runner import (
    CampaignIncomplete,
    CampaignResults,
    StoreNotEmpty,
    run_campaign,
)
from .campaign.scenario import MissingVariant, realize_scenario, simulate_scenario
from .grid import GridMismatch
from .gsa.diagnostics import convergence_series, default_checkpoints, histogram, scatter
from .gsa.distributions import InvalidDistribution
from .gsa.estimators import analyze
from .gsa.maps import sobol_map
from .gsa.sampling import SampleDesign, sample
from .io import HeaderMismatch, IoError, ParseError, Raster, write_ascii_grid, write_csv
from .swe.solver import NonFiniteError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INCOMPLETE = 0, 2, 3, 4
WORKERS_ENV = "SWEGSA_WORKERS"


class UsageError(Exception):
    pass


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers(flag: int | None) -> int | None:
    """--workers, else $SWEGSA_WORKERS, else None (the study's max_workers)."""
    if flag is not None:
        value, source = flag, "--workers"
    elif os.environ.get(WORKERS_ENV):
        source = WORKERS_ENV
        try:
            value = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise UsageError(f"{WORKERS_ENV}={os.environ[WORKERS_ENV]!r} is not an integer") from None
    else:
        return None
    if value < 1:
        raise UsageError(f"{source} must be >= 1, got {value}")
    return value


def _load_design(path) -> SampleDesign:
    if not (Path(path) / "design.json").is_file():
        raise UsageError(f"--design {path}: no design.json found (run 'swegsa sample' first)")
    return SampleDesign.load(path)


def _check_design(design: SampleDesign, names: list[str], what: str) -> None:
    if design.names != names:
        raise UsageError(f"design parameters {design.names} do not match the {what} {names}")


# --- commands ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_study(args.config)
    nominal = replace(cfg, parameters=[])
    sc = realize_scenario([], nominal, "simulate")
    sim = simulate_scenario(sc, read_initial_depth(cfg.scenario))
    out = _out_dir(args.out)
    write_ascii_grid(Raster(sim.grid, sim.wse_max), out / "wse_max.asc")
    write_ascii_grid(Raster(sim.grid, sim.hmax), out / "hmax.asc")
    write_csv(out / "mass.csv", ["t", "volume"], [{"t": t, "volume": v} for t, v in sim.mass_series])
    scalars = []
    for name, probe in cfg.probes.items():
        if isinstance(probe, FullMap):
            write_ascii_grid(extract_output(sim, probe), out / f"{name}.asc")
        else:
            scalars.append({"probe": name, "value": extract_output(sim, probe)})
    if scalars:
        write_csv(out / "probes.csv", ["probe", "value"], scalars)
    print(f"simulated {sc.t_end:g} s in {sim.dt_count} steps on {sim.grid.ncols}x{sim.grid.nrows} "
          f"cells; outputs in {out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = load_study(args.config)
    if not cfg.parameters:
        raise UsageError(f"{args.config} declares no [parameters]")
    n = cfg.n if args.n is None else args.n
    seed = cfg.seed if args.seed is None else args.seed
    design = sample(cfg.params, n, seed)
    design.save(_out_dir(args.out))
    print(f"design of {n} rows x {design.p} parameters ({design.n_runs} runs) written to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_study(args.config)
    design = _load_design(args.design)
    _check_design(design, [s.param.name for s in cfg.parameters], "study")
    workers = _workers(args.workers)
    try:
        report = run_campaign(cfg, design, args.out, max_workers=workers, resume=args.resume)
    except StoreNotEmpty as exc:
        raise UsageError(f"{exc} (pass --resume to continue it)") from None
    except CampaignIncomplete as exc:
        r = exc.report
        print(f"executed {r.executed}, skipped {r.skipped}, failed {len(r.failed)}", file=sys.stderr)
        raise
    print(f"executed {report.executed}, skipped {report.skipped}, "
          f"peak workers {report.high_water}; results in {Path(args.out) / 'results.csv'}")
    return EXIT_OK


def _analyze_scalar(out: Path, name: str, names, design, y, args) -> bool:
    y_a, y_b, y_ab = y
    res = analyze(names, y_a, y_b, y_ab, resamples=args.resamples, seed=args.seed)
    rows = res.rows()
    write_csv(out / f"sobol_{name}.csv", list(rows[0]), rows)
    series = convergence_series(y_a, default_checkpoints(len(y_a)), y_b, y_ab)
    conv = series.rows(names)
    write_csv(out / f"convergence_{name}.csv", list(conv[0]), conv)
    edges, counts = histogram(y_a, bins=args.bins)
    write_csv(out / f"histogram_{name}.csv", ["lo", "hi", "count"],
              [{"lo": a, "hi": b, "count": int(c)} for a, b, c in zip(edges, edges[1:], counts)])
    pairs = [scatter(design.A[:, i], y_a) for i in range(len(names))]
    table = [{**{q: t[j, 0] for q, t in zip(names, pairs)}, name: y_a[j]} for j in range(design.n)]
    write_csv(out / f"scatter_{name}.csv", [*names, name], table)
    return res.degenerate


def _analyze_map(out: Path, name: str, names, grid, y) -> int:
    smap = sobol_map(grid, *y, names)
    maps = _out_dir(out / "maps")
    for q in names:
        for order in ("first", "total"):
            write_ascii_grid(smap.raster(q, order), maps / f"{name}_{q}_{order}.asc")
    return int(smap.mask.sum())


def cmd_analyze(args) -> int:
    results = CampaignResults.from_csv(args.results)
    design = _load_design(args.design)
    names = results.params
    _check_design(design, names, "result table")
    if len(results.block("A")) != design.n:
        raise UsageError(f"result table has {len(results.block('A'))} A rows, design has {design.n}")
    out = _out_dir(args.out)
    if not results.outputs:
        raise UsageError(f"{args.results} has no output columns")
    for name in results.outputs:
        y = results.pick_freeze(name)
        if results.is_map(name):
            masked = _analyze_map(out, name, names, results.map_grid(name), y)
            print(f"{name}: index maps written, {masked} cells masked")
        else:
            flag = _analyze_scalar(out, name, names, design, y, args)
            print(f"{name}: {'degenerate variance, indices undefined' if flag else 'indices written'}")
    return EXIT_OK


def cmd_map(args) -> int:
    results = CampaignResults.from_csv(args.results)
    names = results.params
    if args.param not in names:
        raise UsageError(f"unknown parameter {args.param!r}; known: {', '.join(names)}")
    maps = [o for o in results.outputs if results.is_map(o)]
    if not maps:
        raise UsageError(f"{args.results} has no map outputs")
    output = args.output or maps[0]
    if output not in maps:
        raise UsageError(f"unknown map output {output!r}; known: {', '.join(maps)}")
    smap = sobol_map(results.map_grid(output), *results.pick_freeze(output), names)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_ascii_grid(smap.raster(args.param, args.order), out)
    print(f"{args.order}-order index of {args.param} on {output} written to {out}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swegsa",
        description="Shallow-water flood simulations and Sobol sensitivity analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation of the study's nominal scenario")
    p.add_argument("--config", required=True, help="study TOML file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="draw the pick-freeze design")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="design directory")
    p.add_argument("--n", type=int, help="base sample size (default: campaign.n)")
    p.add_argument("--seed", type=int, help="sampling seed (default: campaign.seed)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("run", help="execute every run of a design")
    p.add_argument("--config", required=True)
    p.add_argument("--design", required=True, help="directory written by 'sample'")
    p.add_argument("--out", required=True, help="campaign store directory")
    p.add_argument("--workers", type=int, help=f"concurrent simulations (fallback ${WORKERS_ENV}, "
                   "then campaign.max_workers)")
    p.add_argument("--resume", action="store_true", help="skip runs already recorded as done")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="Sobol indices, convergence and histograms")
    p.add_argument("--results", required=True, help="results.csv of a finished campaign")
    p.add_argument("--design", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resamples", type=int, default=1000, help="bootstrap resamples")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.add_argument("--bins", type=int, default=20, help="histogram bins")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("map", help="write one Sobol index raster")
    p.add_argument("--results", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--order", choices=("first", "total"), default="first")
    p.add_argument("--output", help="map output name (default: the first one)")
    p.add_argument("--out", required=True, help="raster path (.asc)")
    p.set_defaults(func=cmd_map)
    return parser


USAGE_ERRORS = (ConfigError, UsageError, MissingVariant, InvalidDistribution, GridMismatch,
                ParseError, HeaderMismatch, IoError, FileNotFoundError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"swegsa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteError as exc:
        print(f"swegsa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CampaignIncomplete as exc:
        print(f"swegsa: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
