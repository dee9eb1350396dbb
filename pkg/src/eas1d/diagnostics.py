"""Conserved quantities, a priori bounds and blow-up monitors of a running state.

All sup norms are taken on the trigonometric interpolant (see
:func:`eas1d.field.refined_extreme`) so that grid sampling does not hide
small overshoots of a bound.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .field import Field, Grid, refined_extreme
from .kernel import PowerLawPairKernel, phi_S_floor, phi_S_on_grid

log = logging.getLogger("eas1d")

BOUND_TOL = 1e-6

CSV_COLUMNS = (
    "t", "mass", "momentum", "int_G", "min_rho", "max_rho", "lower_bound",
    "upper_bound_M1", "max_abs_F", "max_abs_H", "max_abs_dxrho", "max_abs_dx2rho",
    "energy_fluct", "energy_fluct_rate_residual", "linf_u", "linf_dxu", "dt",
)


@dataclass(frozen=True)
class TheoryConstants:
    """Everything the explicit density bounds depend on."""

    rho_bar0: float
    F0_inf: float
    H0_inf: float
    min_rho0: float
    max_rho0: float
    c1: float
    c2: float
    c3: float
    r0: float
    a0: float
    alpha: float
    dxrho0_inf: float = 0.0
    phi_m: float = 0.0

    @property
    def M0(self) -> float:
        c = self.c3 * self.rho_bar0
        return c / (c / self.min_rho0 + self.F0_inf)

    @property
    def M1(self) -> float:
        a, c1 = self.alpha, self.c1
        inner = 1e6 / c1 * (self.c3 * a + 2.0 * c1 * self.r0 ** (-a) + self.F0_inf * a)
        return max(self.max_rho0, self.rho_bar0 * inner ** (1.0 / a))

    def lower_envelope(self, t: float) -> float:
        return self.M0 * math.exp(-self.c3 * self.rho_bar0 * t)

    @property
    def uniform_floor(self) -> float:
        """Time-independent floor for kernels with ``phi_S >= phi_m > 0``; 0 otherwise."""
        if self.phi_m <= 0.0:
            return 0.0
        pm = self.phi_m * self.rho_bar0
        return min(self.min_rho0, pm / (self.F0_inf + pm))


def theory_constants(rho0: Field, G0: Field, pk, with_floor: bool = True) -> TheoryConstants:
    """Constants from initial data ``(rho0, G0)`` and a periodized kernel."""
    grid = rho0.grid
    F0 = G0.values / rho0.values
    H0 = grid.deriv(F0) / rho0.values
    return TheoryConstants(
        rho_bar0=rho0.mean(),
        F0_inf=refined_extreme(F0),
        H0_inf=refined_extreme(H0),
        min_rho0=refined_extreme(rho0.values, "min"),
        max_rho0=refined_extreme(rho0.values, "max"),
        c1=pk.c1, c2=pk.c2, c3=pk.c3, r0=pk.r0, a0=pk.a0, alpha=pk.alpha,
        dxrho0_inf=refined_extreme(grid.deriv(rho0.values)),
        phi_m=phi_S_floor(pk) if with_floor else 0.0,
    )


@dataclass
class DiagnosticsRecord:
    """One sample of the monitored quantities; one CSV row."""

    t: float
    mass: float
    momentum: float
    int_G: float
    min_rho: float
    max_rho: float
    lower_bound: float
    upper_bound_M1: float
    max_abs_F: float
    max_abs_H: float
    max_abs_dxrho: float
    max_abs_dx2rho: float
    energy_fluct: float = math.nan
    energy_fluct_rate_residual: float = math.nan
    linf_u: float = math.nan
    linf_dxu: float = math.nan
    dt: float = math.nan
    energy_rate: float = field(default=math.nan, repr=False)
    violations: list = field(default_factory=list, repr=False)

    def row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.row()
                   if v is not None and not (isinstance(v, float) and math.isnan(v)))


# individual reports -----------------------------------------------------------

def conservation_report(state, derived, initial) -> dict:
    """Mass, momentum and mean of G with drifts from ``initial = {mass0, P0}``."""
    rho = state.rho.values
    mass = float(np.mean(rho))
    momentum = float(np.mean(rho * derived.u))
    int_G = float(np.mean(state.G.values))
    m0, p0 = initial["mass0"], initial["P0"]
    return {
        "mass": mass, "momentum": momentum, "int_G": int_G,
        "mass_drift": abs(mass - m0) / abs(m0),
        "momentum_drift": abs(momentum - p0) / max(abs(p0), abs(m0)),
        "int_G_drift": abs(int_G),
    }


def bound_report(state, derived, consts: TheoryConstants, tol: float = BOUND_TOL) -> dict:
    """Density envelopes, transported sup norms and their violation flags."""
    grid = state.rho.grid
    rho = state.rho.values
    F = derived.F
    H = grid.deriv(F) / rho
    out = {
        "min_rho": refined_extreme(rho, "min"),
        "max_rho": refined_extreme(rho, "max"),
        "lower_bound": consts.lower_envelope(state.t),
        "upper_bound_M1": consts.M1,
        "max_abs_F": refined_extreme(F),
        "max_abs_H": refined_extreme(H),
    }
    violations = []
    if out["min_rho"] < out["lower_bound"] - tol:
        violations.append(("lower_bound", out["min_rho"], out["lower_bound"]))
    if out["max_rho"] > out["upper_bound_M1"] + tol:
        violations.append(("upper_bound_M1", out["max_rho"], out["upper_bound_M1"]))
    floor = consts.uniform_floor
    if floor > 0.0 and out["min_rho"] < floor - tol:
        violations.append(("uniform_floor", out["min_rho"], floor))
    out["violations"] = violations
    return out


def _navot_weights(pk, h):
    # leading trapezoid error of sum_{j != 0} h phi(jh) w(jh) for w ~ a z^2
    base = getattr(pk, "base", None)
    if not isinstance(base, PowerLawPairKernel):
        return 0.0
    corr = 2.0 * base.c_alpha * special.zeta(base.alpha - 1.0) * h ** (2.0 - base.alpha)
    if base.mu:
        corr -= 2.0 * base.mu * base.c_beta * special.zeta(base.beta - 1.0) * h ** (2.0 - base.beta)
    return float(corr)


class EnergyKernel:
    """Tabulated periodic kernel for the energy-fluctuation rate on one grid."""

    def __init__(self, pk, grid: Grid):
        self.grid = grid
        table = phi_S_on_grid(pk, grid.N)
        self.table_hat = np.fft.rfft(table)
        self.correction = _navot_weights(pk, grid.dx)

    def conv(self, f):
        # (phi_S * f)(x_i) = dx sum_{j != i} phi_S(x_i - x_j) f(x_j)
        return np.fft.irfft(self.table_hat * np.fft.rfft(f), n=self.grid.N) * self.grid.dx


def energy_fluctuation_report(state, derived, ek: EnergyKernel) -> dict:
    """Energy fluctuation ``E`` and its predicted rate ``R``.

    ``E = iint |u(x)-u(y)|^2 rho(x) rho(y)`` is evaluated through the exact
    identity ``E = 2 (m int rho u^2 - P^2)``. For the alignment dynamics on
    the unit torus one has ``dE/dt = R`` with
    ``R = -2 m iint phi_S(x-y) |u(x)-u(y)|^2 rho(x) rho(y)``, ``m`` the mass.
    The double sum skips the diagonal; for the two-power kernel the missing
    near-diagonal mass is restored by the leading singular trapezoid
    correction.
    """
    rho = state.rho.values
    u = derived.u
    m = float(np.mean(rho))
    P = float(np.mean(rho * u))
    E = 2.0 * (m * float(np.mean(rho * u * u)) - P * P)
    ru = rho * u
    # sum_y phi(x-y)|u(x)-u(y)|^2 rho(y) = u^2 (phi*rho) - 2u (phi*rho u) + phi*(rho u^2)
    inner = u * u * ek.conv(rho) - 2.0 * u * ek.conv(ru) + ek.conv(ru * u)
    inner = inner - ek.correction * derived.dxu ** 2 * rho
    R = -2.0 * m * float(np.mean(rho * inner))
    return {"energy_fluct": E, "energy_rate": R}


def oscillation_report(state) -> dict:
    """Sup norms of the first two derivatives of the density."""
    grid = state.rho.grid
    rho = state.rho.values
    return {
        "max_abs_dxrho": refined_extreme(grid.deriv(rho, 1)),
        "max_abs_dx2rho": refined_extreme(grid.deriv(rho, 2)),
    }


def make_record(state, derived, consts, initial, dt=math.nan, ek=None) -> DiagnosticsRecord:
    cons = conservation_report(state, derived, initial)
    bounds = bound_report(state, derived, consts)
    osc = oscillation_report(state)
    rec = DiagnosticsRecord(
        t=state.t, mass=cons["mass"], momentum=cons["momentum"], int_G=cons["int_G"],
        min_rho=bounds["min_rho"], max_rho=bounds["max_rho"],
        lower_bound=bounds["lower_bound"], upper_bound_M1=bounds["upper_bound_M1"],
        max_abs_F=bounds["max_abs_F"], max_abs_H=bounds["max_abs_H"],
        max_abs_dxrho=osc["max_abs_dxrho"], max_abs_dx2rho=osc["max_abs_dx2rho"],
        linf_u=refined_extreme(derived.u), linf_dxu=refined_extreme(derived.dxu), dt=dt,
        violations=bounds["violations"],
    )
    if ek is not None:
        en = energy_fluctuation_report(state, derived, ek)
        rec.energy_fluct = en["energy_fluct"]
        rec.energy_rate = en["energy_rate"]
    for name, value, bound in rec.violations:
        log.warning(violation_line(name, rec.t, value, bound))
    return rec


def violation_line(name, t, value, bound) -> str:
    return f"VIOLATION {name} t={t!r} value={value!r} bound={bound!r}"


def fill_energy_residuals(records) -> None:
    """Residual ``|dE/dt - R|`` at interior energy samples (three-point derivative)."""
    idx = [i for i, r in enumerate(records) if math.isfinite(r.energy_fluct)]
    for a, b, c in zip(idx, idx[1:], idx[2:]):
        t0, t1, t2 = records[a].t, records[b].t, records[c].t
        E0, E1, E2 = records[a].energy_fluct, records[b].energy_fluct, records[c].energy_fluct
        h0, h1 = t1 - t0, t2 - t1
        if h0 <= 0 or h1 <= 0:
            continue
        dE = (-h1 / (h0 * (h0 + h1)) * E0 + (h1 - h0) / (h0 * h1) * E1
              + h0 / (h1 * (h0 + h1)) * E2)
        records[b].energy_fluct_rate_residual = abs(dE - records[b].energy_rate)


def write_csv(records, fh) -> None:
    """Diagnostics as CSV; floats use ``repr`` so output is bit-reproducible."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([repr(float(v)) for v in r.row()])


def read_csv(fh) -> list[dict]:
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
