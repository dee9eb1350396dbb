"""Influence functions, their periodization and structural constants.

Two kernel families are supported:

* :class:`PowerLawPairKernel`, the two-power model
  ``phi(x) = c_a |x|^(-1-a) - mu c_b |x|^(-1-b)`` whose structural constants
  are derived in closed form;
* :class:`GeneralKernel`, any even scalar function with user-declared
  constants ``(alpha, a0, c1, c2)`` that are validated on a sample.

:class:`PeriodizedKernel` wraps either family with its period-one lattice
sum and the constants ``r0`` and ``c3`` of the periodic kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError, PreconditionError

DEFAULT_IMAGES = 64


def levy_normalization(alpha: float) -> float:
    """Constant of the 1D fractional Laplacian kernel.

    ``Lambda^alpha f(x) = c_alpha p.v. int (f(x) - f(y)) / |x-y|^(1+alpha) dy``
    with ``c_alpha = 2^alpha Gamma((1+alpha)/2) / (sqrt(pi) |Gamma(-alpha/2)|)``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    log_c = (alpha * math.log(2.0) + special.gammaln((1.0 + alpha) / 2.0)
             - 0.5 * math.log(math.pi) - special.gammaln(-alpha / 2.0))
    # gammaln returns log|Gamma|, which is what the formula needs
    return math.exp(log_c)


def _check_nonzero(x):
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise DomainError("kernel is singular at x = 0")
    return x


@dataclass(frozen=True)
class PowerLawPairKernel:
    """``phi(x) = c_alpha |x|^(-1-alpha) - mu c_beta |x|^(-1-beta)``.

    The short-range constants are derived, not declared: ``a0`` is the
    smaller of 1/2 and the alignment radius, ``c1`` is the tightest constant
    for the two-sided power comparison on ``(0, a0]`` and ``c2`` is the exact
    tail integral of ``|phi|`` outside ``[-a0, a0]``.
    """

    alpha: float
    beta: float
    mu: float = 0.0
    c_alpha: float = field(init=False)
    c_beta: float = field(init=False)

    def __post_init__(self):
        a, b, mu = float(self.alpha), float(self.beta), float(self.mu)
        if not 0.0 < b < a < 2.0:
            raise DomainError(f"need 0 < beta < alpha < 2, got alpha={a}, beta={b}")
        if not mu >= 0.0 or not math.isfinite(mu):
            raise DomainError(f"mu must be a finite number >= 0, got {mu}")
        object.__setattr__(self, "c_alpha", levy_normalization(a))
        object.__setattr__(self, "c_beta", levy_normalization(b))

    def __call__(self, x):
        return eval_phi(self, x)

    @property
    def radii(self):
        return structural_radii(self)

    @property
    def a0(self) -> float:
        return min(0.5, self.radii["alignment_radius"])

    @property
    def c1(self) -> float:
        a0 = self.a0
        low = self.c_alpha - self.mu * self.c_beta * a0 ** (self.alpha - self.beta)
        return max(1.0, self.c_alpha, 1.0 / low)

    @property
    def c2(self) -> float:
        # antiderivative of phi on (0, inf), vanishing at infinity
        def prim(x):
            return (-self.c_alpha * x ** -self.alpha / self.alpha
                    + self.mu * self.c_beta * x ** -self.beta / self.beta)
        a0 = self.a0
        R = self.radii["misalignment_radius"]
        if not math.isfinite(R):
            one_side = -prim(a0)
        else:
            # phi > 0 on [a0, R), phi < 0 beyond
            one_side = (prim(R) - prim(a0)) + prim(R)
        return 2.0 * one_side

    def tail_integral(self, lo: float) -> float:
        """Signed ``int_lo^inf phi`` for ``lo > 0``."""
        return (self.c_alpha * lo ** -self.alpha / self.alpha
                - self.mu * self.c_beta * lo ** -self.beta / self.beta)


@dataclass(frozen=True)
class GeneralKernel:
    """User-supplied even kernel with declared structural constants.

    ``evaluator`` maps an array of nonzero positions to kernel values.
    ``support`` is an optional radius beyond which the kernel vanishes;
    it lets the tail quadrature and the periodization stay finite.
    Construction validates the declaration on a log-spaced sample and
    raises :class:`PreconditionError` if it fails.
    """

    alpha: float
    a0: float
    c1: float
    c2: float
    evaluator: Callable = field(compare=False)
    support: float = math.inf
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise DomainError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not 0.0 < self.a0 <= 0.5:
            raise DomainError(f"a0 must lie in (0, 1/2], got {self.a0}")
        if self.c1 < 1.0:
            raise DomainError(f"c1 must be >= 1, got {self.c1}")
        if not self.c2 > 0.0:
            raise DomainError(f"c2 must be positive, got {self.c2}")
        if self.validate:
            report = validate_general_kernel(self)
            if not report["ok"]:
                raise PreconditionError(f"kernel declaration fails validation: {report}")

    def __call__(self, x):
        return eval_phi(self, x)

    def tail_integral(self, lo: float) -> float:
        hi = self.support
        if lo >= hi:
            return 0.0
        val, _ = integrate.quad(lambda t: float(self.evaluator(np.array([t]))[0]),
                                lo, hi, limit=400)
        return val


def validate_general_kernel(kernel: GeneralKernel, samples: int = 256, tol: float = 1e-8) -> dict:
    """Sampled check of the short-range comparison, monotonicity and tail bound."""
    r = np.geomspace(kernel.a0 * 1e-6, kernel.a0, samples)
    phi = np.asarray(kernel.evaluator(r), dtype=float)
    scaled = phi * r ** (1.0 + kernel.alpha)
    comparable = bool(np.all(scaled >= 1.0 / kernel.c1 - tol) and np.all(scaled <= kernel.c1 + tol))
    monotone = bool(np.all(np.diff(phi) <= tol * np.abs(phi[1:])))
    even = bool(np.allclose(kernel.evaluator(-r), phi, rtol=1e-13, atol=0.0))

    def absphi(t):
        return abs(float(kernel.evaluator(np.array([t]))[0]))

    hi = kernel.support
    tail, err = integrate.quad(absphi, kernel.a0, hi, limit=400)
    tail *= 2.0
    tail_ok = bool(tail <= kernel.c2 + tol + 2.0 * err)
    return {"ok": comparable and monotone and even and tail_ok,
            "comparable": comparable, "monotone": monotone, "even": even,
            "tail": tail, "tail_ok": tail_ok,
            "scaled_min": float(scaled.min()), "scaled_max": float(scaled.max())}


def table_kernel(x, phi, alpha, a0, c1, c2, validate=True) -> GeneralKernel:
    """Kernel given by samples ``(x, phi(x))`` at positive positions.

    Interpolation is linear in ``phi(x) |x|^(1+alpha)``, which is smooth and
    bounded for admissible kernels. Below the first sample the scaled value
    is held constant; beyond the last sample the kernel is zero.
    """
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if x.ndim != 1 or x.shape != phi.shape or len(x) < 2:
        raise PreconditionError("table needs two equal-length columns with at least 2 rows")
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise PreconditionError("table positions must be positive and strictly increasing")
    scaled = phi * x ** (1.0 + alpha)
    xmax = float(x[-1])

    def evaluator(t):
        t = np.abs(np.asarray(t, dtype=float))
        s = np.interp(t, x, scaled)
        out = s * t ** (-1.0 - alpha)
        return np.where(t > xmax, 0.0, out)

    return GeneralKernel(alpha=float(alpha), a0=float(a0), c1=float(c1), c2=float(c2),
                         evaluator=evaluator, support=xmax, validate=validate)


def read_kernel_table(path):
    """Load a two-column whitespace or comma separated ``x phi`` table."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    data = np.loadtxt(text.splitlines(), ndmin=2)
    if data.shape[1] != 2:
        raise PreconditionError(f"{path}: expected 2 columns, got {data.shape[1]}")
    return data[:, 0], data[:, 1]


def eval_phi(kernel, x):
    """Kernel value at ``x != 0`` (scalar or array)."""
    x = _check_nonzero(x)
    if isinstance(kernel, PowerLawPairKernel):
        ax = np.abs(x)
        out = kernel.c_alpha * ax ** (-1.0 - kernel.alpha)
        if kernel.mu:
            out = out - kernel.mu * kernel.c_beta * ax ** (-1.0 - kernel.beta)
    else:
        out = np.asarray(kernel.evaluator(x), dtype=float)
    return float(out) if out.ndim == 0 else out


def structural_radii(kernel: PowerLawPairKernel) -> dict:
    """Radii below which the kernel aligns strongly and above which it misaligns."""
    if kernel.mu == 0:
        return {"alignment_radius": math.inf, "misalignment_radius": math.inf}
    p = 1.0 / (kernel.alpha - kernel.beta)
    ratio = kernel.c_alpha / (kernel.mu * kernel.c_beta)
    return {"alignment_radius": (ratio / 2.0) ** p, "misalignment_radius": ratio ** p}


# periodization -------------------------------------------------------------

@dataclass(frozen=True)
class PeriodizedKernel:
    """Period-one lattice sum of ``base`` with its derived constants."""

    base: object
    truncation_K: int = DEFAULT_IMAGES
    r0: float = field(init=False)
    c3: float = field(init=False)

    def __post_init__(self):
        if self.truncation_K < 1:
            raise PreconditionError("truncation_K must be >= 1")
        consts = periodic_constants(self.base)
        object.__setattr__(self, "r0", consts["r0"])
        object.__setattr__(self, "c3", consts["c3"])

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def a0(self):
        return self.base.a0

    @property
    def c1(self):
        return self.base.c1

    @property
    def c2(self):
        return self.base.c2

    def __call__(self, x):
        return eval_phi_S(self, x)


def periodic_constants(kernel) -> dict:
    """``r0`` and ``c3`` of the periodic kernel from ``(alpha, a0, c1, c2)``."""
    return periodic_constants_from(kernel.alpha, kernel.a0, kernel.c1, kernel.c2)


def periodic_constants_from(alpha, a0, c1, c2) -> dict:
    r0 = min(a0, (1.0 / (6.0 * c1 * c2)) ** (1.0 / (1.0 + alpha)))
    c3 = c1 * r0 ** (-(1.0 + alpha)) + c2 * (1.0 + 1.0 / a0)
    return {"r0": r0, "c3": c3}


def _pair_tail(kernel: PowerLawPairKernel, x, K):
    # sum over |k| > K of phi(x + k), exact through Hurwitz zeta
    def zsum(s):
        return special.zeta(s, K + 1 + x) + special.zeta(s, K + 1 - x)
    out = kernel.c_alpha * zsum(1.0 + kernel.alpha)
    if kernel.mu:
        out = out - kernel.mu * kernel.c_beta * zsum(1.0 + kernel.beta)
    return out


def _general_tail(kernel: GeneralKernel, x, K):
    # midpoint-rule tail: sum_{k>K} f(k) ~ int_{K+1/2}^inf f
    if K + 0.5 - 0.5 >= kernel.support:
        return np.zeros_like(x)
    out = np.empty_like(x)
    for i, xi in enumerate(x.ravel()):
        out.flat[i] = kernel.tail_integral(K + 0.5 + xi) + kernel.tail_integral(K + 0.5 - xi)
    return out


def _tail(pk: PeriodizedKernel, x):
    if isinstance(pk.base, PowerLawPairKernel):
        return _pair_tail(pk.base, x, pk.truncation_K)
    return _general_tail(pk.base, x, pk.truncation_K)


def eval_phi_S(pk: PeriodizedKernel, x):
    """Periodized kernel ``sum_k phi(x + k)`` for ``x`` in ``[-1/2, 1/2] \\ {0}``.

    The images ``|k| <= K`` are summed directly and the remaining images are
    added through :func:`phi_S_tail`.
    """
    x = _check_nonzero(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(np.abs(x) > 0.5 + 1e-12):
        raise DomainError("periodized kernel takes positions in [-1/2, 1/2]")
    # phi_S is even; evaluating at |x| makes the result symmetric to the bit
    ax = np.abs(x)
    K = pk.truncation_K
    k = np.arange(-K, K + 1, dtype=float)
    shifted = ax[:, None] + k[None, :]
    out = np.asarray(eval_phi(pk.base, shifted)).sum(axis=1) + _tail(pk, ax)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite periodized kernel value")
    return float(out[0]) if scalar else out


def phi_S_tail(pk: PeriodizedKernel, x):
    """Contribution of the images ``|k| > K`` that :func:`eval_phi_S` adds."""
    ax = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    return _tail(pk, ax)


def phi_S_floor(pk: PeriodizedKernel, samples: int = 513) -> float:
    """``max(0, min phi_S)`` over a sample of ``(0, 1/2]``."""
    x = np.linspace(pk.r0 / 4.0, 0.5, samples)
    return max(0.0, float(np.min(eval_phi_S(pk, x))))


def check_periodic_bounds(pk: PeriodizedKernel, samples: int = 256) -> dict:
    """Sampled check of the short-range comparison and long-range bound of phi_S."""
    a = pk.alpha
    near = np.geomspace(pk.r0 * 1e-6, pk.r0, samples)
    scaled = eval_phi_S(pk, near) * near ** (1.0 + a)
    far = np.linspace(pk.r0, 0.5, samples)
    far_max = float(np.max(np.abs(eval_phi_S(pk, far))))
    lo, hi = 1.0 / (2.0 * pk.c1), 2.0 * pk.c1
    near_ok = bool(scaled.min() >= lo and scaled.max() <= hi)
    return {"ok": near_ok and far_max <= pk.c3, "near_ok": near_ok,
            "scaled_min": float(scaled.min()), "scaled_max": float(scaled.max()),
            "far_max": far_max, "c3": pk.c3}


def phi_S_on_grid(pk: PeriodizedKernel, N: int) -> np.ndarray:
    """Table ``phi_S(j/N)`` for ``j = 0..N-1`` with the singular ``j = 0`` set to 0."""
    j = np.arange(1, N)
    d = j / N
    d = np.where(d > 0.5, d - 1.0, d)
    out = np.zeros(N)
    out[1:] = eval_phi_S(pk, d)
    return out
