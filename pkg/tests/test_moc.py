import math
from types import SimpleNamespace

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from eas1d.dynamics import build_kernel, run
from eas1d.errors import DomainError, PreconditionError, RangeError
from eas1d.field import Field, Grid
from eas1d.kernel import PowerLawPairKernel
from eas1d.moc import (MocSpec, breakthrough_profile, c_bar, check_obeys, d1_dissipation,
                       d1_lower_bound, format_moc_spec, log_select_lambda, omega, omega_eval, omega_velocity,
                       parameter_thresholds, parse_moc_spec, select_lambda, select_parameters,
                       verify_preservation)

from conftest import random_field_values
from helpers import config, moc_condition_margins, moc_conditions_hold


def user_spec(alpha=1.2, lam=0.02, delta=0.3, gamma=0.1, M1=math.nan):
    return MocSpec.from_lambda(delta, gamma, lam, alpha, M1)


def omega_direct(d, g, lam, a, xi):
    if xi <= lam:
        return d * xi / lam - 0.25 * d * (xi / lam) ** (1 + a / 2)
    return 0.75 * d + g * math.log(xi / lam)


class TestOmega:
    @given(st.floats(1e-4, 10.0))
    def test_formula(self, xi):
        s = user_spec()
        assert omega(s, xi) == pytest.approx(omega_direct(0.3, 0.1, 0.02, 1.2, xi), rel=1e-12)

    def test_shape(self):
        s = user_spec()
        xi = np.geomspace(1e-6, 10, 4001)
        w, dw = omega_eval(s, xi)
        assert np.all(np.diff(w) > 0)
        assert np.all(np.diff(dw) <= 1e-12 * dw[:-1])  # concave
        assert omega(s, 0.02) == pytest.approx(0.225)
        assert s.omega_prime0 == pytest.approx(0.3 / 0.02)
        assert omega_eval(s, 0.02 * (1 + 1e-12))[1] == pytest.approx(0.1 / 0.02, rel=1e-9)

    def test_log_space(self):
        # lam far below the smallest double
        s = MocSpec(0.01, 0.004, 1.2, log_lambda_base=-1.0, log_lambda_coef=10.0)
        assert s.lam == 0.0 and s.omega_prime0 == math.inf
        assert s.log_lambda == pytest.approx(-2501.0)
        assert omega(s, 0.1) == pytest.approx(0.0075 + 0.004 * (math.log(0.1) + 2501.0))
        assert s.log_Xi(5.0) == pytest.approx(-1.0 + (5.0 - 10.0 - 0.0075) / 0.004)

    def test_invalid(self):
        with pytest.raises(PreconditionError):
            user_spec(gamma=0.2)
        with pytest.raises(DomainError):
            omega(user_spec(), 0.0)
        with pytest.raises(PreconditionError):
            MocSpec.from_lambda(0.3, 0.1, 0.0, 1.2)

    def test_c_bar(self):
        assert c_bar(1.0) == 2.0 and c_bar(1.0005) == 2.0
        assert c_bar(0.5) == pytest.approx(8.0)
        assert c_bar(1.5) == pytest.approx(3.25)


def brute_obeys(v, spec):
    N = len(v)
    worst = math.inf
    for i in range(N):
        for j in range(N):
            d = abs(i - j) / N
            d = min(d, 1 - d)
            if d > 0:
                worst = min(worst, omega(spec, d) - abs(v[i] - v[j]))
    return worst


class TestObeys:
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 3.0))
    def test_matches_brute_force(self, seed, amp):
        v = amp * random_field_values(np.random.default_rng(seed), 32, modes=5)
        s = user_spec()
        rep = check_obeys(v, s)
        ref = brute_obeys(v, s)
        assert rep.margin == pytest.approx(ref, abs=1e-12)
        assert rep.obeys == (ref > 0)

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.14))
    def test_select_lambda(self, seed, gamma):
        g = Grid(128)
        v = random_field_values(np.random.default_rng(seed), 128, modes=8)
        f_inf = float(np.max(np.abs(v)))
        fp = float(np.max(np.abs(g.deriv(v))))
        spec = MocSpec(0.3, gamma, 1.2, math.log(2 * f_inf / fp), 2 * f_inf)
        assert spec.log_lambda == pytest.approx(log_select_lambda(f_inf, fp, gamma))
        assert check_obeys(v, spec, refine=True).obeys
        if spec.lam > 0:
            assert select_lambda(f_inf, fp, gamma) == pytest.approx(spec.lam)

    def test_select_lambda_edges(self):
        assert select_lambda(1.0, 0.0, 0.1) == math.inf
        with pytest.raises(PreconditionError):
            select_lambda(0.0, 1.0, 0.1)

    def test_refine(self):
        v = np.sin(2 * np.pi * (-0.5 + np.arange(16) / 16))
        s = user_spec()
        a = check_obeys(v, s)
        b = check_obeys(v, s, refine=True)
        assert b.margin <= a.margin + 1e-15

    def test_preservation(self):
        # max rho0 + min rho0 is small, so the initial-data bound on lam is nearly sharp
        cfg = config(grid__N=64, run__T=0.2, run__snapshot_dt=0.05, init__rho_bar=0.3, init__a=0.25)
        tr = run(cfg)
        g = tr.snapshots[0].rho.grid
        rho0 = tr.snapshots[0].rho.values
        ll = log_select_lambda(np.max(np.abs(rho0)), np.max(np.abs(g.deriv(rho0))), 0.2)
        rep = verify_preservation(tr.snapshots, MocSpec(0.5, 0.2, 1.2, ll), refine=True)
        assert rep.preserved and rep.lipschitz_ok and len(rep.reports) == 5
        big = MocSpec(0.5, 0.2, 1.2, ll + math.log(1e3))
        assert verify_preservation(tr.snapshots, big).first_breakthrough == 0.0


@pytest.fixture(scope="module")
def pair_setup():
    cfg = config(grid__N=64, run__T=0.01)
    tr = run(cfg)
    return tr.consts, build_kernel(cfg)


class TestParameters:
    def test_conditions(self, pair_setup):
        consts, pk = pair_setup
        for T in (0.5, 1.0, 2.0):
            spec = select_parameters(T, consts, pk)
            m = moc_condition_margins(spec, consts, pk, consts.lower_envelope(T))
            assert all(moc_conditions_hold(m).values()), m

    @given(st.floats(0.05, 1.0))
    def test_empirical_mode(self, rho_min):
        consts = SimpleNamespace(alpha=1.2, M1=2.0, F0_inf=0.5, H0_inf=0.3, max_rho0=1.3,
                                 dxrho0_inf=1.9, lower_envelope=lambda T: 0.0)
        pk = SimpleNamespace(c1=1.5, c2=2.0, c3=3.0, r0=0.05)
        spec = select_parameters(1.0, consts, pk, "empirical", rho_min)
        assert all(moc_conditions_hold(moc_condition_margins(spec, consts, pk, rho_min)).values())
        # tight: the binding lambda condition is attained up to the 1 - eps factor
        margins = moc_condition_margins(spec, consts, pk, rho_min)
        lam_m = [m for k, (m, _) in margins.items() if k.startswith("lambda")]
        assert max(lam_m) == pytest.approx(math.log1p(-1e-3), abs=1e-9)

    def test_ledger(self, pair_setup):
        consts, pk = pair_setup
        spec = select_parameters(1.0, consts, pk)
        names = {th.name for th in spec.ledger}
        assert {"delta_dissipation", "gamma_concavity", "lambda_short_range"} <= names
        p = parameter_thresholds(consts.lower_envelope(1.0), consts, pk)
        assert p["delta"] == spec.delta and p["gamma"] == spec.gamma

    def test_range_errors(self, pair_setup):
        consts, pk = pair_setup
        with pytest.raises(RangeError) as exc:
            parameter_thresholds(0.0, consts, pk)
        assert exc.value.condition == "rho_min_T"
        with pytest.raises(PreconditionError):
            select_parameters(1.0, consts, pk, "empirical")

    def test_spec_file_round_trip(self, pair_setup):
        consts, pk = pair_setup
        spec = select_parameters(1.0, consts, pk)
        back = parse_moc_spec(format_moc_spec(spec))
        assert back == spec
        s = parse_moc_spec("delta = 0.3\ngamma = 0.1  # comment\nalpha = 1.2\nlambda = 0.02\n")
        assert s.lam == pytest.approx(0.02)
        with pytest.raises(PreconditionError):
            parse_moc_spec("delta = 0.3\nbogus = 1\n")


def truncated_symbol(k, zeta):
    """``A(zeta)`` minus the contribution of ``|z| > a0``, by mpmath."""
    a0 = k.a0

    def phi(z):
        return k.c_alpha * z ** (-1 - k.alpha) - k.mu * k.c_beta * z ** (-1 - k.beta)
    flat = k.c_alpha * a0 ** -k.alpha / k.alpha - k.mu * k.c_beta * a0 ** -k.beta / k.beta
    osc = mpmath.quadosc(lambda z: phi(z) * mpmath.cos(zeta * z), [a0, mpmath.inf], omega=zeta)
    full = zeta ** k.alpha - k.mu * zeta ** k.beta
    return full - 2 * (flat - float(osc))


class TestD1:
    @pytest.mark.parametrize("alpha,beta,mu", [(1.2, 0.6, 0.5), (0.5, 0.25, 0.2), (1.5, 0.5, 1.0)])
    @pytest.mark.parametrize("xi", [0.01, 0.05, 0.12])
    def test_sine_oracle(self, alpha, beta, mu, xi):
        k = PowerLawPairKernel(alpha, beta, mu)
        if xi > k.a0 / 2:
            pytest.skip("pair outside the short range")
        s = user_spec(alpha)
        w = omega(s, xi)
        c = w / (2 * math.sin(math.pi * xi))
        rho = lambda p: 2.0 + c * np.sin(2 * np.pi * np.asarray(p))
        res = d1_dissipation(rho, xi / 2, -xi / 2, k, s)
        assert res.at_breakthrough
        assert res.value == pytest.approx(w * truncated_symbol(k, 2 * math.pi), rel=1e-6)

    def test_not_breakthrough(self):
        k = PowerLawPairKernel(1.2, 0.6, 0.5)
        s = user_spec()
        res = d1_dissipation(lambda p: np.full_like(np.asarray(p, dtype=float), 2.0), 0.05, -0.05, k, s)
        assert res.value == math.inf and not res.at_breakthrough
        with pytest.raises(DomainError):
            d1_dissipation(lambda p: p, 0.3, -0.2, k, s)

    def test_profile_lower_bound(self):
        k = PowerLawPairKernel(1.2, 0.6, 0.5)
        s = user_spec()
        for xi in (0.005, 0.02, 0.08):
            prof = breakthrough_profile(s, xi, center=0.1)
            res = d1_dissipation(prof, prof.x, prof.y, k, s, breakpoints=prof.kinks)
            assert res.at_breakthrough and res.satisfied
            assert res.lower_bound == pytest.approx(d1_lower_bound(s, xi, k.c1))

    def test_profile_on_grid(self):
        s = user_spec()
        prof = breakthrough_profile(s, 0.0625, center=0.0)
        g = Grid(256)
        f = Field(g, prof.sample(256))
        rep = check_obeys(f, s, atol=1e-12)
        assert rep.obeys and rep.margin == pytest.approx(0.0, abs=1e-12)


class TestVelocityModulus:
    def test_quadrature_oracle(self):
        s = user_spec(lam=0.002)
        pk = SimpleNamespace(r0=0.08, c1=1.5, c3=2.0)
        consts = SimpleNamespace(M1=3.0, F0_inf=0.4)
        a = s.alpha
        w = lambda e: omega_direct(0.3, 0.1, 0.002, a, e)
        for xi in (0.001, 0.005, 0.02):
            first = integrate.quad(lambda e: w(e) * e ** -a, 0, xi, points=[0.002] if xi > 0.002 else None,
                                   limit=200)[0]
            second = integrate.quad(lambda e: w(e) * e ** (-1 - a), xi, pk.r0 + xi, limit=200)[0]
            ref = 52 * 1.5 / a * first + 8 * 1.5 * xi * second + 3.0 * (8 * 2.0 + 0.4) * xi
            assert omega_velocity(s, consts, pk, xi) == pytest.approx(ref, rel=1e-7)

    def test_domain(self):
        pk = SimpleNamespace(r0=0.08, c1=1.5, c3=2.0)
        with pytest.raises(DomainError):
            omega_velocity(user_spec(), SimpleNamespace(M1=1, F0_inf=0), pk, 0.05)

    def test_underflowed_lambda(self, pair_setup):
        consts, pk = pair_setup
        spec = select_parameters(1.0, consts, pk)
        assert omega_velocity(spec, consts, pk, pk.r0 / 8) == math.inf
