"""Modulus of continuity (MOC) for the density and the quantities around it.

The modulus is

    omega(xi) = delta xi/lam - delta/4 (xi/lam)^(1 + alpha/2)   for xi <= lam,
    omega(xi) = 3 delta/4 + gamma log(xi/lam)                    for xi >  lam.

The parameter chain in :func:`select_parameters` drives ``lam`` far below
the smallest positive double, so ``log(lam)`` is stored as the pair
``base - coef/gamma``. Every quantity that depends on ``lam`` is formed
from that pair without ever forming ``lam`` itself.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, PreconditionError, RangeError
from .field import Field, interpolate
from .kernel import PowerLawPairKernel, eval_phi

EPS_STRICT = 1e-3


def c_bar(alpha: float, tol: float = 1e-3) -> float:
    """Constant of the velocity estimate; ``|alpha - 1| < tol`` uses the ``alpha = 1`` value."""
    if abs(alpha - 1.0) < tol:
        return 2.0
    if alpha < 1.0:
        return 1.0 / (alpha ** 2 * (1.0 - alpha))
    return 1.0 / (alpha - 1.0) + 1.25


@dataclass(frozen=True)
class MocSpec:
    """Parameters ``(delta, gamma, lam)`` with ``log(lam) = base - coef/gamma``.

    ``M1`` is the range bound used for the breakthrough radius ``Xi``;
    ``ledger`` holds the thresholds that produced the spec, if any.
    """

    delta: float
    gamma: float
    alpha: float
    log_lambda_base: float
    log_lambda_coef: float = 0.0
    M1: float = math.nan
    ledger: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not (self.delta > 0 and self.gamma > 0):
            raise PreconditionError("delta and gamma must be positive")
        if not self.gamma < self.delta / 2:
            raise PreconditionError(f"need gamma < delta/2, got gamma={self.gamma}, delta={self.delta}")
        if not 0 < self.alpha < 2:
            raise DomainError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not math.isfinite(self.log_lambda):
            raise RangeError("log lambda is not finite", condition="lambda")

    @classmethod
    def from_lambda(cls, delta, gamma, lam, alpha, M1=math.nan) -> "MocSpec":
        if not lam > 0:
            raise PreconditionError("lambda must be positive")
        return cls(delta, gamma, alpha, math.log(lam), 0.0, M1)

    @property
    def log_lambda(self) -> float:
        return self.log_lambda_base - self.log_lambda_coef / self.gamma

    @property
    def lam(self) -> float:
        """``lambda``; 0.0 when it underflows."""
        return math.exp(self.log_lambda) if self.log_lambda > -745.2 else 0.0

    def log_Xi(self, M1: float | None = None) -> float:
        """``log`` of the radius where ``omega`` reaches ``M1``."""
        M1 = self.M1 if M1 is None else M1
        return self.log_lambda_base + (M1 - self.log_lambda_coef - 0.75 * self.delta) / self.gamma

    @property
    def Xi(self) -> float:
        lx = self.log_Xi()
        return math.exp(lx) if lx > -745.2 else 0.0

    @property
    def omega_prime0(self) -> float:
        """``omega'(0+) = delta/lam``; inf when it overflows."""
        lv = math.log(self.delta) - self.log_lambda
        return math.exp(lv) if lv < 709.7 else math.inf

    def log_branch(self, log_xi):
        """``omega`` on ``xi > lam`` from ``log(xi)``, cancellation-free."""
        return (0.75 * self.delta + self.gamma * (np.asarray(log_xi) - self.log_lambda_base)
                + self.log_lambda_coef)


def omega_eval(spec: MocSpec, xi):
    """``(omega(xi), omega'(xi))``; the derivative is one-sided (left) at ``lam``."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0):
        raise DomainError("omega is evaluated at positive distances only")
    lx = np.log(xi_arr)
    lin = lx <= spec.log_lambda
    om = np.empty_like(xi_arr)
    dom = np.empty_like(xi_arr)
    hi = ~lin
    om[hi] = spec.log_branch(lx[hi])
    dom[hi] = spec.gamma / xi_arr[hi]
    if np.any(lin):
        r = np.exp(lx[lin] - spec.log_lambda)
        a2 = spec.alpha / 2.0
        om[lin] = spec.delta * r - 0.25 * spec.delta * r ** (1.0 + a2)
        dom[lin] = spec.omega_prime0 * (1.0 - 0.25 * (1.0 + a2) * r ** a2)
    if xi_arr.ndim == 0:
        return float(om), float(dom)
    return om, dom


def omega(spec: MocSpec, xi):
    return omega_eval(spec, xi)[0]


# --- parameter selection -------------------------------------------------------

def select_lambda(f_inf: float, fprime_inf: float, gamma: float) -> float:
    """``(2 |f|/|f'|) exp(-2 |f|/gamma)``: any smaller scale makes ``f`` obey ``omega``.

    Returns ``inf`` when ``fprime_inf == 0``; constants obey every modulus.
    """
    if not f_inf > 0:
        raise PreconditionError("f_inf must be positive")
    if fprime_inf < 0:
        raise PreconditionError("fprime_inf must be nonnegative")
    if fprime_inf == 0:
        return math.inf
    return math.exp(log_select_lambda(f_inf, fprime_inf, gamma))


def log_select_lambda(f_inf, fprime_inf, gamma) -> float:
    return math.log(2.0 * f_inf / fprime_inf) - 2.0 * f_inf / gamma


@dataclass(frozen=True)
class Threshold:
    """One upper bound ``log(value) = base - coef/gamma`` in the parameter chain."""

    name: str
    base: float
    coef: float = 0.0
    quantity: str = "lambda"

    def log_value(self, gamma: float) -> float:
        return self.base - self.coef / gamma


def _min_threshold(items, gamma):
    best = items[0]
    for th in items[1:]:
        # compare base_i - coef_i/gamma without adding numbers of wildly different size
        diff = (th.base - best.base) - (th.coef - best.coef) / gamma
        if diff < 0:
            best = th
    return best


def parameter_thresholds(rho_min, consts, pk, eps=EPS_STRICT):
    """All upper bounds on ``delta``, ``gamma`` and ``log(lam)`` with the chosen values."""
    a = consts.alpha
    c1, c2, c3, r0, M1 = pk.c1, pk.c2, pk.c3, pk.r0, consts.M1
    if not rho_min > 0:
        raise RangeError("minimum density bound underflows to 0", condition="rho_min_T")
    cb = c_bar(a)
    d_items = {
        "delta_dissipation": rho_min / (16.0 * c1 ** 2),
        "delta_critical": a * rho_min / (128.0 * 22.0 * c1 ** 2 * cb),
        "delta_below_one": 1.0 - eps,
    }
    delta = min(d_items.values())
    # the first two conditions are non-strict; the third is open, hence 1 - eps
    if not delta > 0:
        raise RangeError("delta underflows", condition=min(d_items, key=d_items.get))
    g_items = {
        "gamma_concavity": delta / 2.0,
        "gamma_enhanced": 0.75 * a * delta,
        "gamma_critical": (2.0 ** a - 1.0) * a * rho_min / (512.0 * c1 ** 2),
    }
    gamma = min(g_items.values()) * (1.0 - eps)
    if not gamma > 0:
        raise RangeError("gamma underflows", condition=min(g_items, key=g_items.get))
    K = 2.0 * c2 + 10.0 * c3 + 3.0 * consts.F0_inf + M1 ** 2 * consts.H0_inf
    logMK = math.log(M1) + math.log(K)
    rho0_inf = consts.max_rho0
    lam_items = [
        Threshold("lambda_initial_data",
                  math.log(2.0 * rho0_inf / consts.dxrho0_inf) if consts.dxrho0_inf > 0 else math.inf,
                  2.0 * rho0_inf if consts.dxrho0_inf > 0 else 0.0),
        Threshold("lambda_short_range", math.log(r0 / 4.0), M1),
        Threshold("lambda_below_delta", math.log(delta)),
        Threshold("lambda_subcritical_small",
                  (math.log(a * rho_min / (128.0 * c1)) - logMK) / a),
        Threshold("lambda_log_range", math.log(gamma), M1),
        Threshold("lambda_subcritical_large",
                  (math.log((2.0 ** a - 1.0) * rho_min / (8.0 * a * c1)) - logMK) / a, M1),
    ]
    chosen = _min_threshold(lam_items, gamma)
    base = chosen.base + math.log1p(-eps)
    if not math.isfinite(chosen.log_value(gamma)):
        raise RangeError("log lambda is not finite", condition=chosen.name)
    return {
        "rho_min_T": rho_min, "delta": delta, "gamma": gamma, "K": K,
        "delta_items": d_items, "gamma_items": g_items, "lambda_items": lam_items,
        "lambda_choice": chosen.name, "log_lambda_base": base, "log_lambda_coef": chosen.coef,
    }


def select_parameters(T: float, consts, pk, rho_min_mode: str = "theoretical",
                      rho_min: float | None = None, eps: float = EPS_STRICT) -> MocSpec:
    """``(delta, gamma, lam)`` from the explicit condition chain on ``[0, T]``.

    ``rho_min_mode='theoretical'`` takes the density floor from the
    envelope ``M0 exp(-c3 rho_bar T)``; ``'empirical'`` uses ``rho_min``
    (e.g. the running minimum of a simulation) instead. Strict inequalities
    are turned into attained values by the factor ``1 - eps``.
    """
    if not T > 0:
        raise PreconditionError("T must be positive")
    if rho_min_mode == "theoretical":
        rho_min = consts.lower_envelope(T)
    elif rho_min_mode == "empirical":
        if rho_min is None:
            raise PreconditionError("empirical mode needs rho_min")
    else:
        raise PreconditionError(f"unknown rho_min_mode {rho_min_mode!r}")
    p = parameter_thresholds(rho_min, consts, pk, eps)
    ledger = tuple(
        [Threshold(k, math.log(v), 0.0, "delta") for k, v in p["delta_items"].items()]
        + [Threshold(k, math.log(v), 0.0, "gamma") for k, v in p["gamma_items"].items()]
        + p["lambda_items"]
    )
    return MocSpec(p["delta"], p["gamma"], consts.alpha, p["log_lambda_base"],
                   p["log_lambda_coef"], consts.M1, ledger)


# --- obedience scan ------------------------------------------------------------

@dataclass(frozen=True)
class MocReport:
    obeys: bool
    worst_pair: tuple
    margin: float
    t: float = math.nan


def _values(f):
    return f.values if isinstance(f, Field) else np.asarray(f, dtype=float)


def check_obeys(f, spec: MocSpec, atol: float = 0.0, refine: bool = False, t: float = math.nan) -> MocReport:
    """Scan every pair of grid points at periodic distance ``d`` in ``(0, 1/2]``.

    ``obeys`` means ``|f(x_i) - f(x_j)| < omega(d) + atol`` for all pairs;
    ``worst_pair`` is ``(x_i, x_j, |f(x_i) - f(x_j)|, omega(d))`` at the
    smallest margin ``omega(d) - |f(x_i) - f(x_j)|``. ``refine`` doubles the
    grid by trigonometric interpolation first.
    """
    v = _values(f)
    if refine:
        N0 = len(v)
        c = np.fft.rfft(v)
        c2 = np.zeros(N0 + 1, dtype=complex)
        c2[:N0 // 2 + 1] = c
        c2[N0 // 2] *= 0.5
        v = np.fft.irfft(c2, n=2 * N0) * 2.0
    N = len(v)
    x = -0.5 + np.arange(N) / N
    lags = np.arange(1, N // 2 + 1)
    om = omega(spec, lags / N)
    best = (math.inf, 0, 0)
    for L, w in zip(lags, om):
        diff = np.abs(v - np.roll(v, -L))
        i = int(np.argmax(diff))
        m = w - diff[i]
        if m < best[0]:
            best = (m, i, L)
    margin, i, L = best
    j = (i + L) % N
    pair = (float(x[i]), float(x[j]), float(abs(v[i] - v[j])), float(om[L - 1]))
    return MocReport(bool(margin > -atol), pair, float(margin), t)


@dataclass
class PreservationReport:
    reports: list
    first_breakthrough: float | None
    max_dxrho: float
    lipschitz_ok: bool

    @property
    def preserved(self) -> bool:
        return self.first_breakthrough is None


def verify_preservation(snapshots, spec: MocSpec, refine: bool = False) -> PreservationReport:
    """Run :func:`check_obeys` on the density of every snapshot.

    Also checks ``max |rho_x| <= omega'(0+) = delta/lam`` in log form.
    """
    reports, first, worst = [], None, 0.0
    for s in snapshots:
        rep = check_obeys(s.rho, spec, refine=refine, t=s.t)
        reports.append(rep)
        if not rep.obeys and first is None:
            first = s.t
        worst = max(worst, float(np.max(np.abs(s.rho.grid.deriv(s.rho.values)))))
    lip = worst == 0.0 or math.log(worst) <= math.log(spec.delta) - spec.log_lambda
    return PreservationReport(reports, first, worst, bool(lip))


# --- dissipation at a breakthrough -----------------------------------------------

@dataclass(frozen=True)
class D1Result:
    value: float
    lower_bound: float
    xi: float
    at_breakthrough: bool

    @property
    def satisfied(self) -> bool:
        return self.value >= self.lower_bound


def d1_lower_bound(spec: MocSpec, xi: float, c1: float) -> float:
    a = spec.alpha
    if math.log(xi) <= spec.log_lambda:
        return (a * spec.delta / (32.0 * c1)
                * math.exp((-1.0 - a / 2.0) * spec.log_lambda) * xi ** (1.0 - a / 2.0))
    return (2.0 ** a - 1.0) / (2.0 * a * c1) * omega(spec, xi) * xi ** (-a)


def _phi_z2_integral(kernel, e):
    """``int_0^e phi(z) z^2 dz``."""
    if isinstance(kernel, PowerLawPairKernel):
        a, b = kernel.alpha, kernel.beta
        return kernel.c_alpha * e ** (2 - a) / (2 - a) - kernel.mu * kernel.c_beta * e ** (2 - b) / (2 - b)
    val, _ = integrate.quad(lambda z: float(eval_phi(kernel, z)) * z * z, 0.0, e, limit=200)
    return val


def d1_dissipation(rho, x: float, y: float, kernel, spec: MocSpec, tol: float = 1e-8,
                   breakpoints=()) -> D1Result:
    """``p.v. int_{|z| <= a0} phi(z) (omega(xi) - rho(x+z) + rho(y+z)) dz``.

    ``rho`` is a callable of position (periodic) or a :class:`Field`, in
    which case it is evaluated by trigonometric interpolation. The integral
    is folded onto ``(0, a0]``. The folded integrand behaves like
    ``2 (omega(xi) - rho(x) + rho(y)) phi(z)`` near 0, so it is finite only
    at a breakthrough, where ``rho(x) - rho(y) = omega(xi)`` (within
    ``tol``); otherwise the sign of that term decides an infinite result.
    A small ball ``z < e`` is handled through the second-order Taylor term.
    ``breakpoints`` lists positions where ``rho`` has kinks.
    """
    if isinstance(rho, Field):
        field_ = rho

        def rho(p):
            p = (np.asarray(p, dtype=float) + 0.5) % 1.0 - 0.5
            return interpolate(field_, p)

    xi = abs(x - y)
    xi = min(xi, 1.0 - xi)
    a0 = kernel.a0
    if not 0 < xi <= a0 / 2 + 1e-15:
        raise DomainError(f"need 0 < xi <= a0/2 = {a0 / 2}, got {xi}")
    w = omega(spec, xi)
    lb = d1_lower_bound(spec, xi, kernel.c1)

    def B(z):
        z = np.asarray(z, dtype=float)
        return -rho(x + z) - rho(x - z) + rho(y + z) + rho(y - z)

    B0 = float(B(0.0))
    c0 = 2.0 * w + B0
    if abs(c0) > tol:
        return D1Result(math.copysign(math.inf, c0), lb, xi, False)
    e = 1e-3 * xi
    B2 = (float(B(e)) - B0) / e ** 2
    inner = B2 * _phi_z2_integral(kernel, e)
    pts = {e, a0}
    for p in breakpoints:
        for q in (x, y):
            d = abs(((p - q) + 0.5) % 1.0 - 0.5)
            if e < d < a0:
                pts.add(d)
    edges = sorted(pts)

    def integrand(z):
        return float(eval_phi(kernel, z)) * (float(B(z)) - B0)

    outer = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-12, epsrel=1e-10)
            outer += val
    # c0 is zero at a breakthrough; it is not added since its integral diverges
    return D1Result(inner + outer, lb, xi, True)


@dataclass(frozen=True)
class BreakthroughProfile:
    """Density obeying ``omega`` with equality exactly at ``(x, y)``.

    ``rho(c + z) = rho_bar + f(z)`` with ``f`` odd,
    ``f(z) = omega(2|z|) h(z) / 2`` for ``|z| <= Z`` where
    ``h = 1 - kappa q/(1 + q)``, ``q = (2|z|/xi - 1)^2``, and ``f`` linear from ``f(Z)``
    down to 0 at ``|z| = 1/2``. The pair is ``x = c + xi/2``, ``y = c - xi/2``.
    For ``Z`` much above 1/4 the ramp through the antipode is too steep to
    obey ``omega``; :func:`breakthrough_profile` rejects such profiles.
    """

    spec: MocSpec
    xi: float
    center: float = 0.0
    kappa: float = 0.05
    Z: float = 0.2
    rho_bar: float = 2.0

    def f(self, z):
        z = np.asarray(z, dtype=float)
        az = np.abs(z)
        inner = np.minimum(az, self.Z)
        with np.errstate(divide="ignore"):
            om = np.where(inner > 0, omega(self.spec, np.maximum(2.0 * inner, 1e-300)), 0.0)
        q = (2.0 * inner / self.xi - 1.0) ** 2
        h = 1.0 - self.kappa * q / (1.0 + q)
        core = 0.5 * om * h
        ramp = np.where(az > self.Z, (0.5 - az) / (0.5 - self.Z), 1.0)
        return np.sign(z) * core * ramp

    def __call__(self, p):
        z = (np.asarray(p, dtype=float) - self.center + 0.5) % 1.0 - 0.5
        return self.rho_bar + self.f(z)

    @property
    def x(self):
        return self.center + self.xi / 2.0

    @property
    def y(self):
        return self.center - self.xi / 2.0

    @property
    def kinks(self):
        c, lam = self.center, self.spec.lam
        out = [c, c + self.Z, c - self.Z, c + 0.5]
        if lam > 0:
            out += [c + lam / 2.0, c - lam / 2.0]
        return out

    def sample(self, N: int) -> np.ndarray:
        return self(-0.5 + np.arange(N) / N)


def breakthrough_profile(spec: MocSpec, xi: float, center: float = 0.0, kappa: float = 0.05,
                         Z: float = 0.2, check_N: int = 2048) -> BreakthroughProfile:
    """Build a profile and confirm on an ``check_N`` grid that it obeys ``omega``.

    Equality at the symmetric pair is allowed, so the scan uses a tiny
    absolute tolerance.
    """
    if not 0 < xi <= 2 * Z:
        raise DomainError("xi must lie in (0, 2Z]")
    prof = BreakthroughProfile(spec, xi, center, kappa, Z)
    rep = check_obeys(prof.sample(check_N), spec, atol=1e-12)
    if not rep.obeys:
        raise PreconditionError(f"profile does not obey omega: {rep}")
    return prof


# --- velocity modulus ------------------------------------------------------------

def _int_omega_power(spec: MocSpec, lo: float, hi: float, p: float) -> float:
    """``int_lo^hi omega(eta) eta^(-p) deta`` for ``0 <= lo < hi``."""
    if hi <= lo:
        return 0.0
    ll = spec.log_lambda
    d, g, a2 = spec.delta, spec.gamma, spec.alpha / 2.0
    total = 0.0
    lam_hi = math.log(hi) <= ll
    # linear branch on [lo, min(hi, lam)], with omega = d r - d/4 r^(1+a2), r = eta/lam
    if lo == 0.0 or math.log(lo) < ll:
        top_log = math.log(hi) if lam_hi else ll
        lo_log = math.log(lo) if lo > 0.0 else -math.inf

        if lo_log == -math.inf and p >= 2.0:
            return math.inf  # omega ~ eta near 0

        def part(q):
            # int eta^(q-1) deta over [lo, top] divided by top^q
            if lo_log == -math.inf:
                return 1.0 / q
            if q == 0:
                return top_log - lo_log
            return -math.expm1(q * (lo_log - top_log)) / q
        # both terms share the factor top^(2-p)/lam
        scale = (2.0 - p) * top_log - ll
        bracket = part(2.0 - p) - 0.25 * math.exp(a2 * (top_log - ll)) * part(2.0 + a2 - p)
        total += d * bracket * (math.exp(scale) if scale < 709 else math.inf)
        if lam_hi:
            return total
        lo_log = ll
    else:
        lo_log = math.log(lo)
    hi_log = math.log(hi)
    # log branch: omega = 3d/4 + g (l - ll) with l = log eta
    s = 1.0 - p
    w_hi = 0.75 * d + g * (hi_log - ll)
    w_lo = 0.75 * d + g * (lo_log - ll)
    if abs(s) < 1e-12:
        D = hi_log - lo_log
        total += w_lo * D + 0.5 * g * D * D
    else:
        def anti(l, w):
            e = math.exp(s * l) if s * l < 709 else math.inf
            return e * (w / s - g / s ** 2)
        total += anti(hi_log, w_hi) - anti(lo_log, w_lo)
    return total


def omega_velocity(spec: MocSpec, consts, pk, xi: float) -> float:
    """Modulus of the velocity induced by a density obeying ``omega``.

    ``Omega(xi) = (52 c1/alpha) int_0^xi omega(eta) eta^-alpha deta
    + 8 c1 xi int_xi^(r0+xi) omega(eta) eta^(-1-alpha) deta
    + M1 (8 c3 + |F0|) xi``. Integrals are exact on each branch of
    ``omega``; the result may be ``inf`` when ``lam`` is astronomically
    small and ``alpha > 1``.
    """
    r0 = pk.r0
    if not 0 < xi <= r0 / 4 * (1 + 1e-12):
        raise DomainError(f"need 0 < xi <= r0/4 = {r0 / 4}, got {xi}")
    a, c1 = spec.alpha, pk.c1
    first = 52.0 * c1 / a * _int_omega_power(spec, 0.0, xi, a)
    second = 8.0 * c1 * xi * _int_omega_power(spec, xi, r0 + xi, 1.0 + a)
    third = consts.M1 * (8.0 * pk.c3 + consts.F0_inf) * xi
    return first + second + third


# --- spec files -------------------------------------------------------------------

_SPEC_KEYS = ("delta", "gamma", "alpha", "lambda", "log_lambda_base", "log_lambda_coef", "M1")


def parse_moc_spec(text: str) -> MocSpec:
    """Read ``key = value`` lines (``#`` comments) into a :class:`MocSpec`."""
    vals = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"line {n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in _SPEC_KEYS:
            raise PreconditionError(f"line {n}: unknown key {k!r}")
        try:
            vals[k] = float(v)
        except ValueError:
            raise PreconditionError(f"line {n}: {k} expects a number, got {v!r}") from None
    for k in ("delta", "gamma", "alpha"):
        if k not in vals:
            raise PreconditionError(f"missing key {k}")
    M1 = vals.get("M1", math.nan)
    if "lambda" in vals:
        return MocSpec.from_lambda(vals["delta"], vals["gamma"], vals["lambda"], vals["alpha"], M1)
    if "log_lambda_base" not in vals:
        raise PreconditionError("need lambda or log_lambda_base")
    return MocSpec(vals["delta"], vals["gamma"], vals["alpha"], vals["log_lambda_base"],
                   vals.get("log_lambda_coef", 0.0), M1)


def format_moc_spec(spec: MocSpec) -> str:
    lines = [f"delta = {spec.delta!r}", f"gamma = {spec.gamma!r}", f"alpha = {spec.alpha!r}",
             f"log_lambda_base = {spec.log_lambda_base!r}",
             f"log_lambda_coef = {spec.log_lambda_coef!r}"]
    if math.isfinite(spec.M1):
        lines.append(f"M1 = {spec.M1!r}")
    return "\n".join(lines) + "\n"
