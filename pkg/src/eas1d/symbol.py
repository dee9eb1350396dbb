"""The Fourier symbol of the alignment operator and its bound checks.

For an even kernel ``phi`` the operator
``L f(x) = p.v. int phi(z) (f(x) - f(x+z)) dz`` acts on ``exp(i zeta x)`` as
multiplication by

    A(zeta) = int (1 - cos(zeta x)) phi(x) dx.

For the two-power kernel this is ``|zeta|^alpha - mu |zeta|^beta``; for
anything else it is computed by quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import NumericError, PreconditionError
from .kernel import PowerLawPairKernel, eval_phi

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class SymbolTable:
    """Symbol values on the wavenumbers ``zeta_k = 2 pi k``, ``k = -N/2 .. N/2-1``."""

    N: int
    values: np.ndarray
    source: str = "closed_form"
    wavenumbers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.N,):
            raise PreconditionError(f"expected {self.N} symbol values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericError("symbol table contains non-finite values")
        values.setflags(write=False)
        zeta = 2.0 * np.pi * np.arange(-self.N // 2, self.N // 2)
        zeta.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "wavenumbers", zeta)

    @classmethod
    def from_rfft_values(cls, N, half, source):
        """Build from values on ``k = 0..N/2``, mirrored to negative ``k``."""
        half = np.asarray(half, dtype=float)
        k = np.arange(-N // 2, N // 2)
        return cls(N, half[np.abs(k)], source)

    @property
    def rfft_values(self) -> np.ndarray:
        """Values on ``k = 0..N/2`` in real-FFT order."""
        return self.values[(np.arange(self.N // 2 + 1) + self.N // 2) % self.N]

    @property
    def positive_max(self) -> float:
        """``max(A, 0)`` over the table."""
        return max(0.0, float(self.values.max()))

    def at(self, k: int) -> float:
        return float(self.values[k + self.N // 2])


def symbol_closed_form(alpha, beta, mu, zeta):
    """``|zeta|^alpha - mu |zeta|^beta``."""
    z = np.abs(np.asarray(zeta, dtype=float))
    out = z ** alpha - mu * z ** beta
    return float(out) if out.ndim == 0 else out


def _scalar_phi(kernel):
    if isinstance(kernel, PowerLawPairKernel):
        ca, cb, a, b, mu = kernel.c_alpha, kernel.c_beta, kernel.alpha, kernel.beta, kernel.mu
        return lambda x: ca * x ** (-1.0 - a) - mu * cb * x ** (-1.0 - b)
    return lambda x: float(eval_phi(kernel, np.array([x]))[0])


def _scaled_phi(kernel):
    """``phi(x) |x|^(1+alpha)``, evaluated without overflow near 0."""
    if isinstance(kernel, PowerLawPairKernel):
        ca, cb, d, mu = kernel.c_alpha, kernel.c_beta, kernel.alpha - kernel.beta, kernel.mu
        return lambda x: ca - mu * cb * x ** d
    phi = _scalar_phi(kernel)
    a = kernel.alpha
    return lambda x: phi(x) * x ** (1.0 + a)


def _quad(func, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(func, a, b, epsabs=1e-11, epsrel=1e-12, limit=500, **kw)
    return val, err


def _tail(kernel, lo):
    if hasattr(kernel, "tail_integral"):
        return kernel.tail_integral(lo), 0.0
    return _quad(_scalar_phi(kernel), lo, np.inf)


def symbol_quadrature(kernel, zeta, tol: float = QUAD_TOL) -> float:
    """Levy-Khintchine integral ``int (1 - cos(zeta x)) phi(x) dx``.

    The half line is split into ``[0, x1]``, ``[x1, a0]`` and ``[a0, inf)``
    with ``x1 = min(a0, 1/|zeta|)``. The first piece uses the substitution
    ``x = x1 s^(1/(2-alpha))`` which makes the integrand bounded. On the
    other two pieces ``1 - cos`` is split and the cosine part goes to
    QUADPACK's Fourier-weighted routines, so no artificial cutoff is needed.
    The error estimate must stay below ``tol`` or, for large symbols where
    that is below round-off, below ``1e-12 |A|``.
    """
    z = abs(float(zeta))
    if z == 0.0:
        return 0.0
    phi = _scalar_phi(kernel)
    a = kernel.alpha
    a0 = kernel.a0
    support = getattr(kernel, "support", math.inf)
    x1 = min(a0, 1.0 / z)
    p = 1.0 / (2.0 - a)

    psi = _scaled_phi(kernel)
    pref = 2.0 * p * x1 ** (2.0 - a)

    def near(s):
        # with psi = phi x^(1+a) the Jacobian cancels the x^(1-a) factor exactly
        x = x1 * s ** p
        if x < 1e-150:
            return pref * psi(1e-150) * (0.5 * z) ** 2
        return pref * psi(x) * (math.sin(0.5 * z * x) / x) ** 2

    total, err = _quad(near, 0.0, 1.0)
    if x1 < a0:
        base, e1 = _tail(kernel, x1)
        base_hi, e2 = _tail(kernel, a0)
        osc, e3 = _quad(phi, x1, a0, weight="cos", wvar=z)
        total += (base - base_hi) - osc
        err += e1 + e2 + e3
    if support > a0:
        base, e1 = _tail(kernel, a0)
        hi = support if math.isfinite(support) else np.inf
        osc, e2 = _quad(phi, a0, hi, weight="cos", wvar=z)
        total += base - osc
        err += e1 + e2
    total *= 2.0
    err *= 2.0
    if not math.isfinite(total) or err > max(tol, 1e-12 * abs(total)):
        raise NumericError(f"symbol quadrature at zeta={zeta} did not converge", estimate=err)
    return total


def symbol_table(kernel, N: int, method: str = "auto") -> SymbolTable:
    """Tabulate the symbol on the wavenumbers of an ``N``-point grid."""
    if method == "auto":
        method = "closed_form" if isinstance(kernel, PowerLawPairKernel) else "quadrature"
    zeta = 2.0 * np.pi * np.arange(N // 2 + 1)
    if method == "closed_form":
        if not isinstance(kernel, PowerLawPairKernel):
            raise PreconditionError("closed form is only available for the two-power kernel")
        half = symbol_closed_form(kernel.alpha, kernel.beta, kernel.mu, zeta)
    elif method == "quadrature":
        half = np.array([symbol_quadrature(kernel, z) for z in zeta])
    else:
        raise PreconditionError(f"unknown symbol method {method!r}")
    return SymbolTable.from_rfft_values(N, half, method)


def power_table(alpha: float, N: int) -> SymbolTable:
    """Pure power symbol ``|zeta|^alpha``."""
    zeta = 2.0 * np.pi * np.arange(N // 2 + 1)
    return SymbolTable.from_rfft_values(N, zeta ** alpha, "closed_form")


# bounds ---------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolBoundsReport:
    """Fitted constants for ``|zeta|^a/C' - C'/2 <= A <= C |zeta|^a + C``."""

    C_lower: float
    C_upper: float
    lower_ok: bool
    upper_ok: bool
    worst_zeta_lower: float
    worst_zeta_upper: float
    deriv_scaled_sup: float
    C_lower_analytic: float = math.nan
    C_upper_analytic: float = math.nan
    analytic_ok: bool | None = None

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def _lower_slack(A, za, Cp):
    return A - za / Cp + 0.5 * Cp


def verify_symbol_bounds(table: SymbolTable, alpha: float, a0: float = 0.5,
                         kernel=None, rtol: float = 1e-12) -> SymbolBoundsReport:
    """Fit the smallest constants in the two-sided power bounds of the symbol.

    Both constants are taken ``>= 1``. The derivative check uses centred
    differences at the half-integer wavenumbers, where ``(A_{k+1} - A_k)/(2 pi)``
    is second-order accurate, and reports ``sup |A'| |zeta|^(1-alpha)`` over
    intervals with both ends at ``|zeta| >= max(1/a0, 1)``. When ``kernel``
    is given, the constants that follow from its declared ``(a0, c1, c2)``
    are checked as well.
    """
    if table.N == 0 or len(table.values) == 0:
        raise PreconditionError("empty symbol table")
    A = table.values
    za = np.abs(table.wavenumbers) ** alpha

    def g(Cp):
        return float(np.min(_lower_slack(A, za, Cp)))

    if g(1.0) >= 0.0:
        Cp = 1.0
    else:
        hi = 2.0
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e300:
                raise NumericError("no finite lower-bound constant")
        Cp = optimize.brentq(g, 1.0, hi, xtol=1e-14, rtol=1e-15)
        # nudge up to the first value that passes the exact re-scan
        while g(Cp) < 0.0:
            Cp = np.nextafter(Cp, np.inf)
    C = max(1.0, float(np.max(A / (za + 1.0))))
    scale = max(1.0, float(np.max(np.abs(A))))
    lower_ok = bool(np.all(_lower_slack(A, za, Cp) >= -rtol * scale))
    upper_ok = bool(np.all(A <= C * za + C + rtol * scale))
    worst_lo = float(table.wavenumbers[np.argmin(_lower_slack(A, za, Cp))])
    worst_hi = float(table.wavenumbers[np.argmax(A - C * za - C)])

    # derivative scaling on the nonnegative half
    half = table.rfft_values
    zeta = 2.0 * np.pi * np.arange(len(half))
    zm = 0.5 * (zeta[1:] + zeta[:-1])
    dA = np.diff(half) / (2.0 * np.pi)
    # both endpoints away from the kink of |zeta|^alpha at 0
    mask = zeta[:-1] >= max(1.0 / a0, 1.0)
    deriv = float(np.max(np.abs(dA[mask]) * zm[mask] ** (1.0 - alpha))) if mask.any() else math.nan

    Cl_an = Cu_an = math.nan
    analytic_ok = None
    if kernel is not None:
        c1, c2, ka0 = kernel.c1, kernel.c2, kernel.a0
        Cl_an = analytic_lower_constant(alpha, ka0, c1, c2)
        Cu_an = analytic_upper_constant(alpha, c1, c2)
        analytic_ok = bool(np.all(_lower_slack(A, za, Cl_an) >= -rtol * scale)
                           and np.all(A <= Cu_an * za + Cu_an + rtol * scale))
    return SymbolBoundsReport(Cp, C, lower_ok, upper_ok, worst_lo, worst_hi, deriv,
                              Cl_an, Cu_an, analytic_ok)


def analytic_lower_constant(alpha, a0, c1, c2) -> float:
    """``C'`` from the comparison ``A >= |z|^a/(c1 c_alpha) - 2 a0^-a/(a c1) - c2``.

    It uses ``int (1 - cos(z x)) |x|^(-1-a) dx = |z|^a / c_alpha``.
    """
    from .kernel import levy_normalization
    c_a = levy_normalization(alpha)
    slope = 1.0 / (c1 * c_a)
    shift = 2.0 / (alpha * c1) * a0 ** (-alpha) + c2
    return max(1.0, 1.0 / slope, 2.0 * shift)


def analytic_upper_constant(alpha, c1, c2) -> float:
    """``C`` from ``A <= c1 |z|^a / c_alpha + 2 c2``."""
    from .kernel import levy_normalization
    return max(1.0, c1 / levy_normalization(alpha), 2.0 * c2)


def sqrt_shifted_symbol(table: SymbolTable, C_prime: float) -> SymbolTable:
    """Table of ``sqrt(C' + A)``; the radicand must be positive everywhere."""
    rad = C_prime + table.values
    bad = np.flatnonzero(rad <= 0.0)
    if bad.size:
        z = table.wavenumbers[bad[0]]
        raise PreconditionError(f"C' + A(zeta) <= 0 at zeta={z:g}")
    return SymbolTable(table.N, np.sqrt(rad), "sqrt_shifted")
