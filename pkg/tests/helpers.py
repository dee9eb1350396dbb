"""Shared builders for the test modules."""
from eas1d.config import parse_config


def config(**kv):
    """Config from ``section__key=value`` keyword pairs."""
    text = "\n".join(f"{k.replace('__', '.')} = {v}" for k, v in kv.items())
    return parse_config(text + "\n")


def _c_bar(alpha):
    if alpha == 1.0:
        return 2.0
    return 1.0 / (alpha ** 2 * (1.0 - alpha)) if alpha < 1 else 1.0 / (alpha - 1.0) + 1.25


def moc_condition_margins(spec, consts, pk, rho_min):
    """Re-derive every admissibility condition on ``(delta, gamma, lam)``.

    Returns ``{name: (margin, strict)}`` with ``margin <= 0`` (``< 0`` when
    strict) meaning satisfied; margins on ``delta`` and ``gamma`` are
    relative. Conditions on ``lam`` are written as
    ``log lam <= b - c/gamma`` and compared as
    ``(B - b) - (C - c)/gamma`` with ``log lam = B - C/gamma`` so that the
    astronomically negative parts cancel exactly.
    """
    import math
    a, c1, c2, c3, r0 = consts.alpha, pk.c1, pk.c2, pk.c3, pk.r0
    d, g, M1 = spec.delta, spec.gamma, consts.M1
    K = 2 * c2 + 10 * c3 + 3 * consts.F0_inf + M1 ** 2 * consts.H0_inf
    pairs = {
        "delta_positive": (0.0, d, True),
        "delta_below_one": (d, 1.0, True),
        "delta_dissipation": (d, rho_min / (16 * c1 ** 2), False),
        "delta_critical": (22 * c1 * _c_bar(a) * d, a * rho_min / (128 * c1), False),
        "gamma_positive": (0.0, g, True),
        "gamma_concavity": (g, d / 2, True),
        "gamma_enhanced": (g, 0.75 * a * d, True),
        "gamma_critical": (64 * c1 / a ** 2 * g, (2 ** a - 1) / (8 * a * c1) * rho_min, True),
    }
    # lhs <= rhs up to rounding of the products, expressed relative to rhs
    out = {k: ((lhs - rhs) / rhs - (0 if strict else 1e-14), strict)
           for k, (lhs, rhs, strict) in pairs.items()}
    B, C = spec.log_lambda_base, spec.log_lambda_coef
    rho0, drho0 = consts.max_rho0, consts.dxrho0_inf
    lam_conditions = {
        "lambda_initial_data": (math.log(2 * rho0 / drho0), 2 * rho0, False),
        "lambda_short_range": (math.log(r0 / 4), M1, False),
        "lambda_below_delta": (math.log(d), 0.0, False),
        # M1 K lam^a < a rho/(128 c1)
        "lambda_subcritical_small": ((math.log(a * rho_min / (128 * c1)) - math.log(M1 * K)) / a,
                                     0.0, True),
        "lambda_log_range": (math.log(g), M1, False),
        # M1 K exp(a M1/gamma) lam^a <= (2^a - 1) rho/(8 a c1)
        "lambda_subcritical_large": ((math.log((2 ** a - 1) * rho_min / (8 * a * c1))
                                      - math.log(M1 * K)) / a, M1, False),
    }
    for name, (b, c, strict) in lam_conditions.items():
        out[name] = ((B - b) - (C - c) / g, strict)
    return out


def moc_conditions_hold(margins):
    return {k: (m < 0 if strict else m <= 0) for k, (m, strict) in margins.items()}
