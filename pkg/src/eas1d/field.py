"""Discrete calculus on the unit torus [-1/2, 1/2).

Everything here is a thin layer over ``numpy.fft``: a uniform grid, a
value-semantic :class:`Field` with cached real-FFT coefficients, and the
handful of Fourier-side operations the solver needs (derivatives,
multipliers, mean-free primitives, 2/3 dealiasing, trigonometric
interpolation).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PreconditionError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``N`` points on the period-one torus."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 16 or self.N % 2:
            raise PreconditionError(f"grid size must be an even integer >= 16, got {self.N}")

    @property
    def period(self) -> float:
        return 1.0

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -0.5 + np.arange(self.N) * self.dx
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavenumbers in real-FFT order, 0..N/2."""
        k = np.arange(self.N // 2 + 1)
        k.setflags(write=False)
        return k

    @cached_property
    def zeta(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*k in real-FFT order."""
        z = TWO_PI * self.k.astype(float)
        z.setflags(write=False)
        return z

    @cached_property
    def _ik(self) -> np.ndarray:
        ik = 1j * self.zeta
        ik[-1] = 0.0  # Nyquist
        return ik

    @cached_property
    def _inv_ik(self) -> np.ndarray:
        inv = np.zeros_like(self._ik)
        inv[1:-1] = 1.0 / self._ik[1:-1]
        return inv

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on the modes kept by the 2/3 rule (|k| < N/3)."""
        return 3 * self.k < self.N

    # array-level kernels, used directly by the time steppers

    def rfft(self, values):
        return np.fft.rfft(values)

    def irfft(self, coeffs):
        return np.fft.irfft(coeffs, n=self.N)

    def deriv(self, values, order=1):
        c = np.fft.rfft(values)
        if order % 2:
            c *= self._ik ** order
        else:
            c *= (1j * self.zeta) ** order
        return np.fft.irfft(c, n=self.N)

    def primitive(self, values):
        return np.fft.irfft(np.fft.rfft(values) * self._inv_ik, n=self.N)

    def dealias(self, values):
        c = np.fft.rfft(values)
        c[~self.dealias_mask] = 0.0
        return np.fft.irfft(c, n=self.N)

    def integral(self, values) -> float:
        return float(np.mean(values))


class Field:
    """Real samples on a :class:`Grid`.

    Values are copied and frozen on construction, so a Field can be shared
    freely. Arithmetic with scalars and other fields on the same grid
    returns new fields.
    """

    __slots__ = ("grid", "values", "__dict__")

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.N,):
            raise PreconditionError(f"expected {grid.N} samples, got shape {values.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.nodes))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.N, float(value)))

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = np.fft.rfft(self.values)
        c.setflags(write=False)
        return c

    def mean(self) -> float:
        return float(np.mean(self.values))

    def integral(self) -> float:
        return self.mean()

    def _other(self, other):
        if isinstance(other, Field):
            _check_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._other(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(N={self.grid.N}, mean={self.mean():.6g})"


def _check_same_grid(a: Field, b: Field):
    if a.grid.N != b.grid.N:
        raise PreconditionError(f"grid mismatch: N={a.grid.N} vs N={b.grid.N}")


def spectral_derivative(f: Field, order: int = 1) -> Field:
    """Fourier derivative of ``f``; the Nyquist mode is dropped for odd orders."""
    return Field(f.grid, f.grid.deriv(f.values, order))


def apply_multiplier(f: Field, table) -> Field:
    """Multiply the Fourier coefficients of ``f`` by a tabulated even symbol."""
    if table.N != f.grid.N:
        raise PreconditionError(f"symbol tabulated for N={table.N}, field has N={f.grid.N}")
    return Field(f.grid, np.fft.irfft(f.coeffs * table.rfft_values, n=f.grid.N))


def mean_free_primitive(theta: Field, tol: float = 1e-10) -> Field:
    """The periodic antiderivative of a mean-free field with zero mean itself."""
    m = theta.mean()
    if abs(m) >= tol:
        raise PreconditionError(f"primitive needs a mean-free input, mean = {m:.3e}")
    return Field(theta.grid, theta.grid.primitive(theta.values))


def dealias(f: Field) -> Field:
    return Field(f.grid, f.grid.dealias(f.values))


# trigonometric interpolation ---------------------------------------------

def _interp_coeffs(values):
    N = len(values)
    c = np.fft.rfft(values) / N
    c[1:N // 2] *= 2.0
    return c


def _trig_eval(c, k, s, deriv=0):
    # c: scaled rfft coeffs, s: offsets from the first node
    phase = np.exp(1j * TWO_PI * np.outer(np.atleast_1d(s), k))
    if deriv:
        phase = phase * (1j * TWO_PI * k) ** deriv
    return (phase @ c).real


def interpolate(f, x) -> np.ndarray:
    """Evaluate the band-limited interpolant of ``f`` at arbitrary points."""
    if isinstance(f, Field):
        values = f.values
    else:
        values = np.asarray(f, dtype=float)
    N = len(values)
    c = _interp_coeffs(values)
    k = np.arange(N // 2 + 1)
    s = np.asarray(x, dtype=float) + 0.5
    out = _trig_eval(c, k, s.ravel())
    return out.reshape(np.shape(x))


def refined_extreme(values, kind: str = "maxabs", candidates: int = 6) -> float:
    """Extreme value of the trigonometric interpolant of ``values``.

    Grid samples under-estimate the continuum extremum by O(dx^2); the
    leading grid candidates are polished with a bounded scalar search on the
    interpolant. ``kind`` is ``"max"``, ``"min"`` or ``"maxabs"``.
    """
    v = np.asarray(values, dtype=float)
    N = len(v)
    if kind == "max":
        score = v
        sign = 1.0
    elif kind == "min":
        score = -v
        sign = -1.0
    elif kind == "maxabs":
        score = np.abs(v)
        sign = None
    else:
        raise ValueError(kind)
    best = float(score.max())
    if not np.isfinite(best) or np.ptp(v) == 0.0:
        return float(sign * best) if sign is not None else best
    c = _interp_coeffs(v)
    k = np.arange(N // 2 + 1)
    peaks = np.flatnonzero((score >= np.roll(score, 1)) & (score >= np.roll(score, -1)))
    peaks = peaks[np.argsort(score[peaks])[::-1][:candidates]]
    dx = 1.0 / N
    for i in peaks:
        s0 = i * dx
        if sign is None:
            target = np.sign(v[i]) or 1.0
        else:
            target = sign
        res = minimize_scalar(
            lambda s: -target * _trig_eval(c, k, s)[0],
            bounds=(s0 - dx, s0 + dx), method="bounded",
            options={"xatol": 1e-13 * max(1.0, abs(s0))},
        )
        best = max(best, float(-res.fun))
    return float(sign * best) if sign is not None else best


def sup_norm(f) -> float:
    values = f.values if isinstance(f, Field) else f
    return refined_extreme(values, "maxabs")
