"""Time evolution of the (rho, G) formulation of the Euler-alignment system.

Both unknowns satisfy continuity equations,

    rho_t + (rho u)_x = 0,    G_t + (G u)_x = 0,    G = u_x - L rho,

and the velocity is rebuilt at every stage from mean-free primitives,

    u = psi + L varphi + I0,   psi' = G,  varphi' = rho - mean(rho),
    I0 = (P0 - int rho psi) / mean(rho),

where ``P0`` is the conserved momentum.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig
from .diagnostics import (EnergyKernel, TheoryConstants, fill_energy_residuals,
                          make_record, theory_constants, violation_line)
from .errors import BlowupSuspected, NumericError, PreconditionError, StateError
from .field import Field, Grid, apply_multiplier, mean_free_primitive, spectral_derivative
from .kernel import (PeriodizedKernel, PowerLawPairKernel, read_kernel_table, table_kernel)
from .symbol import SymbolTable, symbol_table


@dataclass(frozen=True)
class SimState:
    t: float
    rho: Field
    G: Field


@dataclass(frozen=True)
class DerivedFields:
    """Quantities rebuilt from a state; arrays are grid values."""

    varphi: np.ndarray
    psi: np.ndarray
    u: np.ndarray
    dxu: np.ndarray
    F: np.ndarray
    I0: float


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.4
    cfl_grad: float = 0.05
    stab: float = 2.5
    dt_min: float = 1e-8
    dt_max: float = 1e-2
    vacuum_eps: float = 1e-6
    gradient_cap: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.dt_min <= self.dt_max:
            raise PreconditionError("need 0 < dt_min <= dt_max")
        if not self.vacuum_eps > 0.0:
            raise PreconditionError("vacuum_eps must be positive")

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "StepControl":
        s = cfg.step
        return cls(cfl=s.cfl, cfl_grad=s.cfl_grad, stab=s.stab, dt_min=s.dt_min,
                   dt_max=s.dt_max, vacuum_eps=s.vacuum_eps, gradient_cap=s.gradient_cap)


# --- building blocks ----------------------------------------------------------

def compute_G0(rho0: Field, u0: Field, A: SymbolTable) -> Field:
    """``G0 = u0' - L rho0``."""
    if rho0.grid.N != u0.grid.N:
        raise PreconditionError("rho0 and u0 live on different grids")
    return spectral_derivative(u0) - apply_multiplier(rho0, A)


def momentum(rho: Field, u) -> float:
    u = u.values if isinstance(u, Field) else u
    return float(np.mean(rho.values * u))


def _velocity(grid: Grid, rho, G, Ahat, P0):
    rho_bar = float(np.mean(rho))
    theta_hat = np.fft.rfft(rho - rho_bar)
    inv = grid._inv_ik
    varphi_hat = theta_hat * inv
    psi_hat = np.fft.rfft(G) * inv
    psi = np.fft.irfft(psi_hat, n=grid.N)
    Lvarphi = np.fft.irfft(varphi_hat * Ahat, n=grid.N)
    I0 = (P0 - float(np.mean(rho * psi))) / rho_bar
    u = psi + Lvarphi + I0
    return u, varphi_hat, psi, I0


def reconstruct_velocity(state: SimState, A: SymbolTable, P0: float) -> DerivedFields:
    """Velocity and its companions from ``(rho, G)`` and the momentum ``P0``."""
    rho = state.rho.values
    if not np.min(rho) > 0.0:
        raise StateError(f"vacuum: min rho = {np.min(rho):.3e} at t = {state.t}")
    grid = state.rho.grid
    theta = state.rho - state.rho.mean()
    varphi = mean_free_primitive(theta)
    G = state.G
    psi = mean_free_primitive(G - G.mean())
    Lvarphi = apply_multiplier(varphi, A)
    I0 = (P0 - float(np.mean(rho * psi.values))) / state.rho.mean()
    u = psi.values + Lvarphi.values + I0
    dxu = grid.deriv(u)
    return DerivedFields(varphi=varphi.values, psi=psi.values, u=u, dxu=dxu,
                         F=G.values / rho, I0=I0)


def _rhs_arrays(grid: Grid, rho, G, Ahat, P0):
    u, _, _, _ = _velocity(grid, rho, G, Ahat, P0)
    keep = grid.dealias_mask
    ik = grid._ik
    f1 = np.fft.rfft(rho * u)
    f2 = np.fft.rfft(G * u)
    f1[~keep] = 0.0
    f2[~keep] = 0.0
    return -np.fft.irfft(ik * f1, n=grid.N), -np.fft.irfft(ik * f2, n=grid.N)


def rhs(state: SimState, A: SymbolTable, P0: float):
    """``(rho_t, G_t)`` with 2/3-dealiased fluxes."""
    rho = state.rho.values
    if not np.min(rho) > 0.0:
        raise StateError(f"vacuum: min rho = {np.min(rho):.3e}")
    grid = state.rho.grid
    if A.N != grid.N:
        raise PreconditionError("symbol and state grids differ")
    d1, d2 = _rhs_arrays(grid, rho, state.G.values, A.rfft_values, P0)
    return Field(grid, d1), Field(grid, d2)


def rk4_step(state: SimState, dt: float, A: SymbolTable, P0: float) -> SimState:
    """One classical Runge-Kutta step of size ``dt``."""
    grid = state.rho.grid
    Ahat = A.rfft_values
    r0, g0 = state.rho.values, state.G.values

    def f(r, g):
        return _rhs_arrays(grid, r, g, Ahat, P0)

    k1r, k1g = f(r0, g0)
    k2r, k2g = f(r0 + 0.5 * dt * k1r, g0 + 0.5 * dt * k1g)
    k3r, k3g = f(r0 + 0.5 * dt * k2r, g0 + 0.5 * dt * k2g)
    k4r, k4g = f(r0 + dt * k3r, g0 + dt * k3g)
    r = r0 + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    g = g0 + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(g))):
        raise NumericError(f"non-finite state after step at t = {state.t}")
    return SimState(state.t + dt, Field(grid, r), Field(grid, g))


def stable_dt(linf_u, linf_dxu, max_rate, dx, control: StepControl) -> float:
    """Unclamped step from the advective, gradient and dissipative limits.

    ``max_rate`` is the largest dissipation rate, ``max rho * max(A, 0)``
    for the alignment system and ``max(A, 0)`` for the Burgers equation.
    """
    limits = [math.inf]
    if linf_u > 0:
        limits.append(control.cfl * dx / linf_u)
    if linf_dxu > 0:
        limits.append(control.cfl_grad / linf_dxu)
    if max_rate > 0:
        limits.append(control.stab / max_rate)
    return min(limits)


def choose_dt(state: SimState, derived: DerivedFields, control: StepControl, A: SymbolTable) -> float:
    raw = stable_dt(float(np.max(np.abs(derived.u))), float(np.max(np.abs(derived.dxu))),
                    float(np.max(state.rho.values)) * A.positive_max, state.rho.grid.dx, control)
    if raw < control.dt_min:
        raise BlowupSuspected(f"time step {raw:.3e} below dt_min {control.dt_min:.3e} at t = {state.t}")
    return min(raw, control.dt_max)


def advance(state: SimState, control: StepControl, A: SymbolTable, P0: float,
            dt_cap: float = math.inf) -> SimState:
    """One RK4 step with the adaptive step size, shortened to ``dt_cap`` if smaller."""
    derived = reconstruct_velocity(state, A, P0)
    dt = min(choose_dt(state, derived, control, A), dt_cap)
    return rk4_step(state, dt, A, P0)


# --- models and initial data -------------------------------------------------------

def build_kernel(cfg: RunConfig):
    k = cfg.kernel
    if k.type == "power_pair":
        base = PowerLawPairKernel(k.alpha, k.beta, k.mu)
    else:
        x, phi = read_kernel_table(k.table)
        base = table_kernel(x, phi, k.alpha, k.a0, k.c1, k.c2)
    return PeriodizedKernel(base, k.images)


def build_symbol(cfg: RunConfig, pk: PeriodizedKernel | None = None) -> SymbolTable:
    pk = pk or build_kernel(cfg)
    return symbol_table(pk.base, cfg.grid.N, cfg.symbol.method)


def _band_limit(grid: Grid, values):
    return grid.dealias(values)


def random_bandlimited(grid: Grid, m: int, seed: int):
    """Two independent random trigonometric polynomials on modes ``1..m``.

    Coefficients are standard normals from numpy's PCG64 generator seeded
    with ``seed`` and damped by ``1/k``. Each polynomial is normalized to
    unit sup norm on the grid.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = grid.nodes
    out = []
    for _ in range(2):
        c = rng.standard_normal((m, 2))
        k = np.arange(1, m + 1)
        arg = 2.0 * np.pi * np.outer(x, k)
        f = (np.cos(arg) @ (c[:, 0] / k)) + (np.sin(arg) @ (c[:, 1] / k))
        out.append(f / np.max(np.abs(f)))
    return out


def initial_fields(cfg: RunConfig, grid: Grid, A: SymbolTable):
    """``(rho0, u0)`` for the configured preset, band-limited to the 2/3 range."""
    i = cfg.init
    x = grid.nodes
    if i.preset == "constant":
        rho = np.full(grid.N, i.rho_bar)
        u = i.b * np.sin(2.0 * np.pi * i.n * x)
    elif i.preset in ("cosine", "near_vacuum"):
        m = i.m if i.preset == "cosine" else 1
        rho = i.rho_bar + i.a * np.cos(2.0 * np.pi * m * x)
        u = i.b * np.sin(2.0 * np.pi * i.n * x)
    elif i.preset == "random_bandlimited":
        f, g = random_bandlimited(grid, i.m, i.seed)
        rho = i.rho_bar + i.a * f
        u = i.b * g
    else:
        raise PreconditionError(f"unknown preset {i.preset!r}")
    rho = Field(grid, _band_limit(grid, rho))
    u = Field(grid, _band_limit(grid, u))
    if i.velocity == "balanced":
        varphi = mean_free_primitive(rho - rho.mean())
        u = u + apply_multiplier(varphi, A)
    return rho, u


def initial_state(cfg: RunConfig, A: SymbolTable):
    grid = Grid(cfg.grid.N)
    rho0, u0 = initial_fields(cfg, grid, A)
    G0 = compute_G0(rho0, u0, A)
    G0 = G0 - G0.mean()
    return SimState(0.0, rho0, G0), momentum(rho0, u0)


# --- full runs -----------------------------------------------------------------------

@dataclass
class Trajectory:
    snapshots: list
    records: list
    reason: str
    final: SimState
    consts: TheoryConstants | None = None
    P0: float = 0.0
    violations: list = field(default_factory=list)
    steps: int = 0
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.reason == "completed"


def _monitor(state: SimState, alpha: float) -> float:
    order = 1 if alpha <= 1.0 else 2
    return float(np.max(np.abs(state.rho.grid.deriv(state.rho.values, order))))


def _output_times(T, every):
    n = int(math.floor(T / every + 1e-9))
    times = [k * every for k in range(1, n + 1)]
    if not times or times[-1] < T - 1e-12 * max(1.0, T):
        times.append(T)
    return times


def run(cfg: RunConfig, pk: PeriodizedKernel | None = None, A: SymbolTable | None = None,
        keep_snapshots: bool = True, on_snapshot=None) -> Trajectory:
    """Integrate the configured problem to ``run.T``.

    Diagnostics are sampled every ``run.diag_dt`` and snapshots every
    ``run.snapshot_dt`` (plus the initial and final state); steps are
    shortened to land on those times exactly. The run stops early with
    ``reason`` set to ``vacuum``, ``gradient_cap``, ``nan`` or
    ``dt_collapse``.
    """
    if cfg.run.mode != "euler_alignment":
        raise PreconditionError("run() integrates the Euler-alignment system; use burgers_run")
    pk = pk or build_kernel(cfg)
    A = A or build_symbol(cfg, pk)
    control = StepControl.from_config(cfg)
    state, P0 = initial_state(cfg, A)
    grid = state.rho.grid
    consts = theory_constants(state.rho, state.G, pk)
    initial = {"mass0": state.rho.mean(), "P0": P0}
    ek = EnergyKernel(pk, grid) if cfg.run.energy_every > 0 else None
    T = cfg.run.T
    diag_times = _output_times(T, cfg.run.diag_dt)
    snap_times = _output_times(T, cfg.run.snapshot_dt)

    records, snapshots, violations = [], [], []
    n_diag = 0

    def record(s, dt):
        nonlocal n_diag
        derived = reconstruct_velocity(s, A, P0)
        use_ek = ek if (ek is not None and n_diag % cfg.run.energy_every == 0) else None
        rec = make_record(s, derived, consts, initial, dt, use_ek)
        n_diag += 1
        records.append(rec)
        violations.extend(violation_line(n, rec.t, v, b) for n, v, b in rec.violations)

    def snap(s):
        if keep_snapshots:
            snapshots.append(s)
        if on_snapshot is not None:
            on_snapshot(s)

    record(state, math.nan)
    snap(state)
    reason, message = "completed", ""
    di = si = 0
    steps = 0
    last_dt = math.nan
    while state.t < T - 1e-14 * max(1.0, T):
        target = min(diag_times[di], snap_times[si])
        try:
            derived = reconstruct_velocity(state, A, P0)
            dt = choose_dt(state, derived, control, A)
            dt = min(dt, target - state.t)
            state = rk4_step(state, dt, A, P0)
        except BlowupSuspected as exc:
            reason, message = "dt_collapse", str(exc)
            break
        except NumericError as exc:
            reason, message = "nan", str(exc)
            break
        except StateError as exc:
            reason, message = "vacuum", str(exc)
            break
        steps += 1
        last_dt = dt
        if abs(state.t - target) <= 1e-12 * max(1.0, T):
            state = replace(state, t=target)
        min_rho = float(np.min(state.rho.values))
        if min_rho < control.vacuum_eps:
            reason, message = "vacuum", f"min rho = {min_rho:.3e} at t = {state.t}"
            break
        mon = _monitor(state, pk.alpha)
        if mon > control.gradient_cap:
            reason, message = "gradient_cap", f"oscillation {mon:.3e} at t = {state.t}"
            break
        if di < len(diag_times) and state.t >= diag_times[di]:
            record(state, last_dt)
            di += 1
        if si < len(snap_times) and state.t >= snap_times[si]:
            snap(state)
            si += 1
    if reason != "completed" and (not records or records[-1].t != state.t):
        try:
            record(state, last_dt)
        except Exception:  # state may be unusable after an abort
            pass
        snap(state)
    fill_energy_residuals(records)
    return Trajectory(snapshots, records, reason, state, consts, P0, violations, steps, message)


# --- snapshot files ------------------------------------------------------------------

MAGIC = b"EAS1"
VERSION = 1
_HEADER = struct.Struct("<4sIQd")


def write_snapshot(fh, t: float, *arrays) -> None:
    """Header ``EAS1``, u32 version, u64 N, f64 t, then the arrays as little-endian f64."""
    N = len(arrays[0])
    fh.write(_HEADER.pack(MAGIC, VERSION, N, float(t)))
    for a in arrays:
        fh.write(np.asarray(a, dtype="<f8").tobytes())


def read_snapshot(fh):
    """Return ``(t, arrays)``; the number of arrays follows from the file size."""
    head = fh.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise PreconditionError("truncated snapshot header")
    magic, version, N, t = _HEADER.unpack(head)
    if magic != MAGIC or version != VERSION:
        raise PreconditionError(f"not an EAS1 v1 snapshot (magic={magic!r}, version={version})")
    body = np.frombuffer(fh.read(), dtype="<f8")
    if N == 0 or body.size % N:
        raise PreconditionError("snapshot payload does not match N")
    return t, [body[i * N:(i + 1) * N].astype(float) for i in range(body.size // N)]


def save_state(path, state: SimState) -> None:
    with open(path, "wb") as fh:
        write_snapshot(fh, state.t, state.rho.values, state.G.values)


def load_state(path) -> SimState:
    with open(path, "rb") as fh:
        t, arrays = read_snapshot(fh)
    if len(arrays) != 2:
        raise PreconditionError(f"{path}: expected rho and G, found {len(arrays)} arrays")
    grid = Grid(len(arrays[0]))
    return SimState(t, Field(grid, arrays[0]), Field(grid, arrays[1]))
