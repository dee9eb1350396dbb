"""Constant-density companion: ``u_t + u u_x = -Lambda^a u + mu Lambda^b u``.

It reuses the grid, symbol and step-size machinery of the alignment solver;
only the right-hand side differs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .dynamics import (StepControl, _output_times, initial_fields, stable_dt)
from .errors import BlowupSuspected, NumericError, PreconditionError
from .field import Field, Grid
from .kernel import PowerLawPairKernel
from .symbol import SymbolTable, symbol_table

BURGERS_COLUMNS = ("t", "mean_u", "energy", "linf_u", "linf_dxu", "dt")


@dataclass(frozen=True)
class BurgersState:
    t: float
    u: Field


@dataclass
class BurgersRecord:
    t: float
    mean_u: float
    energy: float
    linf_u: float
    linf_dxu: float
    dt: float = math.nan

    def row(self):
        return [getattr(self, c) for c in BURGERS_COLUMNS]


@dataclass
class BurgersTrajectory:
    snapshots: list
    records: list
    reason: str
    final: BurgersState
    steps: int = 0
    message: str = ""
    grad_history: list = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.reason == "completed"


def _rhs(grid: Grid, u, Ahat):
    c = np.fft.rfft(u)
    ux = np.fft.irfft(grid._ik * c, n=grid.N)
    flux = np.fft.rfft(u * ux)
    flux[~grid.dealias_mask] = 0.0
    return -np.fft.irfft(flux + Ahat * c, n=grid.N)


def burgers_rhs(u: Field, A: SymbolTable) -> Field:
    """``-dealias(u u_x) - L u``."""
    if A.N != u.grid.N:
        raise PreconditionError("symbol and field grids differ")
    return Field(u.grid, _rhs(u.grid, u.values, A.rfft_values))


def burgers_step(state: BurgersState, dt: float, A: SymbolTable) -> BurgersState:
    grid = state.u.grid
    Ahat = A.rfft_values
    u0 = state.u.values
    k1 = _rhs(grid, u0, Ahat)
    k2 = _rhs(grid, u0 + 0.5 * dt * k1, Ahat)
    k3 = _rhs(grid, u0 + 0.5 * dt * k2, Ahat)
    k4 = _rhs(grid, u0 + dt * k3, Ahat)
    u = u0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(u)):
        raise NumericError(f"non-finite velocity after step at t = {state.t}")
    return BurgersState(state.t + dt, Field(grid, u))


def _record(state: BurgersState, dt) -> BurgersRecord:
    u = state.u.values
    ux = state.u.grid.deriv(u)
    return BurgersRecord(state.t, float(np.mean(u)), float(np.mean(u * u)),
                         float(np.max(np.abs(u))), float(np.max(np.abs(ux))), dt)


def burgers_symbol(cfg: RunConfig) -> SymbolTable:
    k = cfg.kernel
    if k.type != "power_pair":
        raise PreconditionError("the Burgers companion needs the two-power kernel")
    return symbol_table(PowerLawPairKernel(k.alpha, k.beta, k.mu), cfg.grid.N, "closed_form")


def burgers_initial(cfg: RunConfig, A: SymbolTable) -> BurgersState:
    """The preset's velocity; ``constant`` and ``cosine`` presets use ``b sin(2 pi n x)``."""
    grid = Grid(cfg.grid.N)
    _, u = initial_fields(cfg, grid, A)
    return BurgersState(0.0, u)


def burgers_run(cfg: RunConfig, A: SymbolTable | None = None, u0: Field | None = None,
                keep_snapshots: bool = True) -> BurgersTrajectory:
    """RK4 integration with the shared step-size rule.

    The dissipative limit uses ``max(A, 0)``; the run stops with
    ``gradient_cap`` when ``max |u_x|`` exceeds ``step.gradient_cap`` and
    with ``dt_collapse`` when the step falls below ``step.dt_min``.
    """
    A = A or burgers_symbol(cfg)
    control = StepControl.from_config(cfg)
    state = BurgersState(0.0, u0) if u0 is not None else burgers_initial(cfg, A)
    grid = state.u.grid
    T = cfg.run.T
    diag_times = _output_times(T, cfg.run.diag_dt)
    snap_times = _output_times(T, cfg.run.snapshot_dt)
    records = [_record(state, math.nan)]
    snapshots = [state] if keep_snapshots else []
    reason, message = "completed", ""
    di = si = steps = 0
    dts = []
    last_dt = math.nan
    while state.t < T - 1e-14 * max(1.0, T):
        target = min(diag_times[di], snap_times[si])
        u = state.u.values
        ux = grid.deriv(u)
        linf_dxu = float(np.max(np.abs(ux)))
        if linf_dxu > control.gradient_cap:
            reason, message = "gradient_cap", f"max|u_x| = {linf_dxu:.3e} at t = {state.t}"
            break
        raw = stable_dt(float(np.max(np.abs(u))), linf_dxu, A.positive_max, grid.dx, control)
        if raw < control.dt_min:
            reason = "dt_collapse"
            message = str(BlowupSuspected(f"time step {raw:.3e} below dt_min at t = {state.t}"))
            break
        dts.append((state.t, linf_dxu))
        dt = min(raw, control.dt_max, target - state.t)
        try:
            state = burgers_step(state, dt, A)
        except NumericError as exc:
            reason, message = "nan", str(exc)
            break
        steps += 1
        last_dt = dt
        if abs(state.t - target) <= 1e-12 * max(1.0, T):
            state = BurgersState(target, state.u)
        if di < len(diag_times) and state.t >= diag_times[di]:
            records.append(_record(state, last_dt))
            di += 1
        if si < len(snap_times) and state.t >= snap_times[si]:
            if keep_snapshots:
                snapshots.append(state)
            si += 1
    if reason != "completed":
        records.append(_record(state, last_dt))
        if keep_snapshots:
            snapshots.append(state)
    return BurgersTrajectory(snapshots, records, reason, state, steps, message, dts)


def blowup_time_estimate(traj: BurgersTrajectory, growth: float = 2.0) -> float:
    """Extrapolated time at which ``1 / max|u_x|`` reaches zero.

    Near a gradient singularity ``1/max|u_x|`` decreases roughly linearly
    in time. The step history from the moment ``max|u_x|`` first exceeds
    ``growth`` times its initial value up to the abort is fitted by a
    straight line whose root is returned. NaN if the run completed or the
    fit does not decrease.
    """
    if traj.completed or len(traj.grad_history) < 4:
        return math.nan
    hist = np.asarray(traj.grad_history, dtype=float)
    t, g = hist[:, 0], hist[:, 1]
    start = np.argmax(g >= growth * g[0])
    if g[start] < growth * g[0] or len(g) - start < 3:
        return math.nan
    slope, icpt = np.polyfit(t[start:], 1.0 / g[start:], 1)
    if slope >= 0:
        return math.nan
    return float(-icpt / slope)
