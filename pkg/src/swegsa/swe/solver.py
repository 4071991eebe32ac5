"""Well-balanced finite-volume solver for the 2D shallow water equations.

The scheme follows the hydrostatic reconstruction of Audusse et al.: each
interface sees depths cut at ``max(z_left, z_right)``, the numerical flux
is evaluated on those depths, and the pressure difference between cell and
interface depth is added back on each side. With MUSCL reconstruction the
free surface, depth and velocities are limited with minmod and a centred
bed-slope term closes the balance. Lake-at-rest states are therefore fixed
points up to rounding, and depths stay nonnegative under the CFL limit.

Both directions are swept by the same routine: the x sweep runs along
array columns, the y sweep runs on a row-flipped transposed view so that
increasing index means going north.
"""

from __future__ import annotations

import os
from dataclasses import replace

import numpy as np

from .numerics import friction_source, hydrostatic_reconstruction, minmod, numerical_flux
from .state import (
    FlowState,
    FreeOutflow,
    FrictionModel,
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

try:
    from . import _kernels
except ImportError:  # pragma: no cover - numba missing
    _kernels = None

NG = 2
# cells per sweep block; keeps temporaries bounded on very large grids
_BLOCK_CELLS = 1 << 20


def _velocity(hq, h, h_dry):
    wet = h > h_dry
    return np.where(wet, hq / np.where(wet, h, 1.0), 0.0)


def _fill_ghosts(H, U, V, Z, config: SolverConfig, t: float) -> None:
    """Write the two ghost layers on each side in place."""
    ny, nx = H.shape[0] - 2 * NG, H.shape[1] - 2 * NG
    g = config.g
    bcs = config.boundaries
    # (side, normal array, tangential array, inward sign, axis)
    for side, normal, tangential, inward in (
        ("west", U, V, 1.0),
        ("east", U, V, -1.0),
        ("north", V, U, -1.0),
        ("south", V, U, 1.0),
    ):
        bc = bcs[side]
        if side in ("west", "east"):
            n_int = nx
            take = lambda A, k: A[:, k]  # noqa: E731

            def put(A, k, val):
                A[:, k] = val
        else:
            n_int = ny
            take = lambda A, k: A[k, :]  # noqa: E731

            def put(A, k, val):
                A[k, :] = val

        low = side in ("west", "north")
        if low:
            ghosts = [NG - 1, NG - 2]
            mirror = [NG, NG + 1]
            wrap = [NG + n_int - 1, NG + n_int - 2]
        else:
            ghosts = [NG + n_int, NG + n_int + 1]
            mirror = [NG + n_int - 1, NG + n_int - 2]
            wrap = [NG, NG + 1]

        if isinstance(bc, Periodic):
            for gk, wk in zip(ghosts, wrap):
                for A in (H, U, V, Z):
                    put(A, gk, take(A, wk))
            continue

        for gk, mk in zip(ghosts, mirror):
            put(Z, gk, take(Z, mk))
        if isinstance(bc, FreeOutflow):
            edge = mirror[0]
            for gk in ghosts:
                for A in (H, U, V, Z):
                    put(A, gk, take(A, edge))
            continue
        if isinstance(bc, ImposedDepth):
            edge = mirror[0]
            for gk in ghosts:
                put(H, gk, bc.depth)
                put(U, gk, take(U, edge))
                put(V, gk, take(V, edge))
            continue

        # wall reflection, also the base for discharge inflow
        for gk, mk in zip(ghosts, mirror):
            put(H, gk, take(H, mk))
            put(normal, gk, -take(normal, mk))
            put(tangential, gk, take(tangential, mk))
        if isinstance(bc, Wall):
            continue
        if not isinstance(bc, ImposedDischarge):
            raise TypeError(f"unsupported boundary condition {bc!r}")
        q = bc.discharge(t)
        if q <= 0:
            continue
        start, stop = bc.span if bc.span is not None else (0, n_int)
        along = slice(NG + start, NG + stop)
        h_edge = take(H, mirror[0])[along]
        h_b = np.maximum(h_edge, (q * q / g) ** (1.0 / 3.0))
        for gk in ghosts:
            for A, val in ((H, h_b), (normal, inward * q / h_b), (tangential, 0.0)):
                line = take(A, gk)
                line[along] = val


def _reconstruct(H, U, V, Z, order, h_dry):
    """Face states (lo, hi) of cells 1 .. n+2 of a padded strip along axis 1."""
    if order == 1:
        cells = slice(NG - 1, -(NG - 1))
        h, u, v, z = H[:, cells], U[:, cells], V[:, cells], Z[:, cells]
        return (h, u, v, z), (h, u, v, z), None
    wet = H > h_dry
    flat = ~(wet[:, :-2] & wet[:, 1:-1] & wet[:, 2:])
    lo, hi = [], []
    eta = H + Z
    for q in (eta, H, U, V):
        qm, q0, qp = q[:, :-2], q[:, 1:-1], q[:, 2:]
        half = 0.5 * np.where(flat, 0.0, minmod(q0 - qm, qp - q0))
        lo.append(q0 - half)
        hi.append(q0 + half)
    eta_lo, h_lo, u_lo, v_lo = lo
    eta_hi, h_hi, u_hi, v_hi = hi
    z_lo = eta_lo - h_lo
    z_hi = eta_hi - h_hi
    source = 0.5 * (h_lo + h_hi) * (z_hi - z_lo)
    return (h_lo, u_lo, v_lo, z_lo), (h_hi, u_hi, v_hi, z_hi), source


def _sweep_block(H, U, V, Z, config: SolverConfig):
    """Flux differences for the interior cells of a padded strip."""
    g = config.g
    lo, hi, source = _reconstruct(H, U, V, Z, config.order, config.h_dry)
    h_l, u_l, v_l, z_l = (a[:, :-1] for a in hi)
    h_r, u_r, v_r, z_r = (a[:, 1:] for a in lo)
    hs_l, hs_r, _ = hydrostatic_reconstruction(h_l, z_l, h_r, z_r)
    f_mass, f_norm, f_tan = numerical_flux(
        (hs_l, u_l, v_l), (hs_r, u_r, v_r), config.flux_scheme, g, config.h_dry
    )
    out_of_left = f_norm + 0.5 * g * (h_l * h_l - hs_l * hs_l)
    into_right = f_norm + 0.5 * g * (h_r * h_r - hs_r * hs_r)
    d_mass = f_mass[:, 1:] - f_mass[:, :-1]
    d_norm = out_of_left[:, 1:] - into_right[:, :-1]
    if source is not None:
        d_norm = d_norm + g * source[:, 1:-1]
    d_tan = f_tan[:, 1:] - f_tan[:, :-1]
    return d_mass, d_norm, d_tan


def use_kernel() -> bool:
    """Compiled sweeps unless numba is missing or SWEGSA_PURE_NUMPY is set."""
    return _kernels is not None and not os.environ.get("SWEGSA_PURE_NUMPY")


def _sweep(H, U, V, Z, config: SolverConfig):
    if use_kernel():
        m, n = H.shape[0], H.shape[1] - 2 * NG
        out = tuple(np.empty((m, n)) for _ in range(3))
        _kernels.sweep(H, U, V, Z, config.order, config.flux_scheme == "hll",
                       config.g, config.h_dry, *out)
        return out
    m = H.shape[0]
    n = H.shape[1] - 2 * NG
    rows = max(1, _BLOCK_CELLS // max(H.shape[1], 1))
    if rows >= m:
        return _sweep_block(H, U, V, Z, config)
    out = [np.empty((m, n)) for _ in range(3)]
    for a in range(0, m, rows):
        b = min(m, a + rows)
        for o, d in zip(out, _sweep_block(H[a:b], U[a:b], V[a:b], Z[a:b], config)):
            o[a:b] = d
    return tuple(out)


def _divergence(h, hu, hv, Zp, config: SolverConfig, t: float):
    """Sum of x and y flux differences for the conservative variables."""
    ny, nx = h.shape
    Hp = np.empty_like(Zp)
    Up = np.empty_like(Zp)
    Vp = np.empty_like(Zp)
    inner = (slice(NG, NG + ny), slice(NG, NG + nx))
    Hp[inner] = h
    Up[inner] = _velocity(hu, h, config.h_dry)
    Vp[inner] = _velocity(hv, h, config.h_dry)
    _fill_ghosts(Hp, Up, Vp, Zp, config, t)

    rows = slice(NG, NG + ny)
    xm, xu, xv = _sweep(Hp[rows], Up[rows], Vp[rows], Zp[rows], config)

    cols = slice(NG, NG + nx)
    ym, yv, yu = _sweep(
        Hp[::-1, cols].T, Vp[::-1, cols].T, Up[::-1, cols].T, Zp[::-1, cols].T, config
    )
    return xm + ym.T[::-1], xu + yu.T[::-1], xv + yv.T[::-1]


def _padded_bed(topo: Topography, config: SolverConfig) -> np.ndarray:
    ny, nx = topo.grid.shape
    Zp = np.zeros((ny + 2 * NG, nx + 2 * NG))
    Zp[NG:NG + ny, NG:NG + nx] = topo.z
    # bed ghosts depend only on the boundary type; fill once with dummies
    dummy = np.zeros_like(Zp)
    _fill_ghosts(dummy.copy(), dummy.copy(), dummy.copy(), Zp, config, 0.0)
    return Zp


def _euler(h, hu, hv, Zp, config, t, ratio):
    dm, du, dv = _divergence(h, hu, hv, Zp, config, t)
    return h - ratio * dm, hu - ratio * du, hv - ratio * dv


def _clean(h, hu, hv, h_dry):
    h = np.maximum(h, 0.0)
    dry = h <= h_dry
    return h, np.where(dry, 0.0, hu), np.where(dry, 0.0, hv)


def stable_timestep(state: FlowState, config: SolverConfig) -> float:
    """CFL timestep ``cfl * cellsize / max(|u| + c, |v| + c)``, capped at dt_max."""
    wet = state.h > config.h_dry
    if not np.any(wet):
        return config.dt_max
    c = np.sqrt(config.g * state.h[wet])
    lam = max(np.max(np.abs(state.u[wet]) + c), np.max(np.abs(state.v[wet]) + c))
    if lam <= 0:
        return config.dt_max
    return float(min(config.cfl * state.grid.cellsize / lam, config.dt_max))


def _check_finite(state: FlowState) -> None:
    for name in ("h", "u", "v"):
        arr = getattr(state, name)
        bad = ~np.isfinite(arr)
        if bad.any():
            cell = tuple(int(i) for i in np.argwhere(bad)[0])
            raise NonFiniteError(
                f"non-finite {name} at cell (row, col) = {cell}, t = {state.t:g} s",
                cell=cell,
                t=state.t,
            )


def step(state: FlowState, topo: Topography, friction: FrictionModel | None,
         config: SolverConfig, dt: float | None = None, *, _bed: np.ndarray | None = None) -> FlowState:
    """Advance one timestep (forward Euler, or Heun for second order)."""
    topo.grid.check_same(state.grid, "state and topography grids")
    if dt is None:
        dt = stable_timestep(state, config)
    Zp = _bed if _bed is not None else _padded_bed(topo, config)
    h_dry = config.h_dry
    ratio = dt / state.grid.cellsize
    h = state.h
    hu = h * state.u
    hv = h * state.v

    h1, hu1, hv1 = _clean(*_euler(h, hu, hv, Zp, config, state.t, ratio), h_dry)
    if config.order == 2:
        h2, hu2, hv2 = _clean(*_euler(h1, hu1, hv1, Zp, config, state.t + dt, ratio), h_dry)
        h1, hu1, hv1 = _clean(0.5 * (h + h2), 0.5 * (hu + hu2), 0.5 * (hv + hv2), h_dry)

    u = _velocity(hu1, h1, h_dry)
    v = _velocity(hv1, h1, h_dry)
    if friction is not None and friction.law != "none":
        u, v = friction_source(h1, u, v, friction, dt, config.g, h_dry)
    new = FlowState(state.grid, h1, u, v, state.t + dt)
    _check_finite(new)
    return new


def _with_inflow(config: SolverConfig, inflow) -> SolverConfig:
    bcs = {
        side: (replace(bc, q=inflow) if isinstance(bc, ImposedDischarge) else bc)
        for side, bc in config.boundaries.items()
    }
    return replace(config, boundaries=bcs)


def run_simulation(topo: Topography, initial: FlowState, friction: FrictionModel | None,
                   config: SolverConfig, t_end: float, inflow=None) -> SimulationOutput:
    """Integrate from ``initial.t`` to ``t_end`` tracking per-cell maxima.

    ``inflow`` (a Hydrograph or a constant), when given, replaces the
    discharge of every ImposedDischarge boundary.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end {t_end} precedes initial time {initial.t}")
    if inflow is not None:
        config = _with_inflow(config, inflow)
    topo.grid.check_same(initial.grid, "initial state and topography grids")
    initial.validate(config.h_dry)
    dry = initial.h <= config.h_dry
    state = FlowState(
        initial.grid, initial.h, np.where(dry, 0.0, initial.u), np.where(dry, 0.0, initial.v),
        initial.t,
    )
    bed = _padded_bed(topo, config)
    hmax = state.h.copy()
    wse_max = state.h + topo.z
    mass = [(state.t, state.volume())]
    next_sample = state.t + config.sample_interval
    steps = 0
    while state.t < t_end:
        if steps >= config.max_steps:
            raise SimulationTimeout(
                f"step cap {config.max_steps} reached at t = {state.t:g} s before t_end = {t_end:g} s"
            )
        dt = stable_timestep(state, config)
        last = state.t + dt >= t_end
        if last:
            dt = t_end - state.t
        state = step(state, topo, friction, config, dt, _bed=bed)
        if last:
            state.t = float(t_end)
        steps += 1
        np.maximum(hmax, state.h, out=hmax)
        np.maximum(wse_max, state.h + topo.z, out=wse_max)
        if state.t >= next_sample:
            mass.append((state.t, state.volume()))
            while next_sample <= state.t:
                next_sample += config.sample_interval
    if mass[-1][0] != state.t:
        mass.append((state.t, state.volume()))
    return SimulationOutput(hmax, wse_max, state, mass, steps)
