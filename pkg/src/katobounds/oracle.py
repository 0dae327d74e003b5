"""Independent high-precision re-evaluation of the constant layer.

Everything here is written directly against the displayed formulas using
mpmath at 50 significant digits, deliberately sharing no code with
:mod:`katobounds.constants`.  The ``oracle`` CLI subcommand compares the two
paths and pins the values; the acceptance suite requires agreement to a
relative error below 1e-12.
"""

from __future__ import annotations

import mpmath as mp

DPS = 50


def _ctx():
    ctx = mp.mp.clone()
    ctx.dps = DPS
    return ctx


def oracle_B(delta, d) -> float:
    ctx = _ctx()
    delta = ctx.mpf(delta)
    d = ctx.mpf(d)
    val = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (d - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - d)) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    return float(val)


def oracle_gamma(lam, delta, D, d) -> float:
    ctx = _ctx()
    lam, delta, D = ctx.mpf(lam), ctx.mpf(delta), ctx.mpf(D)
    B = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (ctx.mpf(d) - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - ctx.mpf(d))) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    branch = min(2 ** (-1 / (delta - 1)), ctx.mpf(1) / (4 * (ctx.exp(lam * B * D) - 1)))
    return float(B * lam * branch)


def oracle_gallot_rhs(lam, delta, D, d) -> float:
    ctx = _ctx()
    lam, delta, D = ctx.mpf(lam), ctx.mpf(delta), ctx.mpf(D)
    B = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (ctx.mpf(d) - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - ctx.mpf(d))) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    return float(lam ** delta / (ctx.exp(lam * B * D) - 1) / 2)


def oracle_weak_threshold(delta, D, d) -> float:
    ctx = _ctx()
    delta, D = ctx.mpf(delta), ctx.mpf(D)
    B = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (ctx.mpf(d) - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - ctx.mpf(d))) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    return float(
        (ctx.mpf(d) - 1)
        * (2 * (ctx.exp(delta - 1) - 1)) ** (-2 / delta)
        * ((delta - 1) / (B * D)) ** 2
    )


def oracle_K(delta, Kprime=1.0) -> float:
    ctx = _ctx()
    delta = ctx.mpf(delta)
    return float(
        ctx.mpf(Kprime) * (4 * (ctx.exp(delta - 1) - 1) / (delta - 1)) ** (delta / 2)
    )


def oracle_K_lambda(lam, delta, D, d, Kprime=1.0) -> float:
    ctx = _ctx()
    gamma = ctx.mpf(oracle_gamma(lam, delta, D, d))
    return float(ctx.mpf(Kprime) * gamma ** (-ctx.mpf(delta) / 2))


def oracle_I(alpha, delta, p) -> float:
    """I through the lower-incomplete-gamma closed form.

    int_0^1 e^(-alpha t) t^(-s) dt = alpha^(s-1) gamma_lower(1-s, alpha),
    plus the exact tail e^(-alpha)/alpha.  (Direct tanh-sinh quadrature of
    the singular integrand loses digits for s near 1 and is not used.)
    """
    ctx = _ctx()
    alpha, delta, p = ctx.mpf(alpha), ctx.mpf(delta), ctx.mpf(p)
    s = delta / (2 * p)
    head = alpha ** (s - 1) * ctx.gammainc(1 - s, 0, alpha)
    tail = ctx.exp(-alpha) / alpha
    return float(head + tail)


def oracle_J(beta, delta, p) -> float:
    """Defining integral of J, integrated numerically (not the closed form).

    The substitution t = u^m with m(1 - s) >= 2 removes the endpoint
    singularity before quadrature; tanh-sinh converges slowly on t^(-s)
    itself once s approaches 1.
    """
    import math

    ctx = _ctx()
    beta, delta, p = ctx.mpf(beta), ctx.mpf(delta), ctx.mpf(p)
    s = delta / (2 * p)
    m = max(2, math.ceil(2.0 / float(1 - s)))

    def head(upper):
        return ctx.quad(lambda u: m * u ** (m * (1 - s) - 1),
                        [0, upper ** (ctx.mpf(1) / m)])

    if beta <= 1:
        return float(head(beta))
    return float(head(ctx.mpf(1)) + (beta - 1))


def oracle_c_pd(p, d) -> float:
    ctx = _ctx()
    p = ctx.mpf(p)
    delta = p + ctx.mpf(d) / 2
    B = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (ctx.mpf(d) - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - ctx.mpf(d))) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    return float(
        (ctx.mpf(d) - 1)
        * ((delta - 1) / B) ** 2
        * (2 * (ctx.exp(delta - 1) - 1)) ** (ctx.mpf(-4) / (2 * p + d - 2))
    )


def oracle_voigt(b, beta) -> tuple[float, float]:
    ctx = _ctx()
    b, beta = ctx.mpf(b), ctx.mpf(beta)
    C = 1 / (1 - b)
    return float(C), float(ctx.log(C) / beta)


def oracle_betti_bound(b, beta, delta, D, d, Kprime=1.0) -> float:
    ctx = _ctx()
    b, beta, delta, D = ctx.mpf(b), ctx.mpf(beta), ctx.mpf(delta), ctx.mpf(D)
    K = ctx.mpf(Kprime) * (4 * (ctx.exp(delta - 1) - 1) / (delta - 1)) ** (delta / 2)
    expo = (1 + 1 / beta) * (1 + b) / (1 - b) + delta / 2
    return float(d * (2 / (1 - b)) ** expo * (1 + K * D ** (delta / 2)))


def oracle_ultra_constant(b, beta, delta, D, d, vol, Kprime=1.0) -> float:
    ctx = _ctx()
    b, beta, delta, D = ctx.mpf(b), ctx.mpf(beta), ctx.mpf(delta), ctx.mpf(D)
    K = ctx.mpf(Kprime) * (4 * (ctx.exp(delta - 1) - 1) / (delta - 1)) ** (delta / 2)
    expo = (1 + 1 / beta) * (1 + b) / (1 - b) + delta / 2
    return float((2 / (1 - b)) ** expo * (1 + K * D ** (delta / 2)) / ctx.mpf(vol))


def oracle_gamma_identity(delta, D, d) -> tuple[float, float]:
    """Both sides of the identity gamma((delta-1)/(B*D)) = (delta-1)/(4D(e^(delta-1)-1))."""
    ctx = _ctx()
    delta, D = ctx.mpf(delta), ctx.mpf(D)
    B = (
        ctx.sqrt(2 * (delta - 1) / delta)
        * (ctx.mpf(d) - 1) ** (1 - 1 / delta)
        * ((delta - 2) / (delta - ctx.mpf(d))) ** (ctx.mpf(1) / 2 - 1 / delta)
    )
    lam = (delta - 1) / (B * D)
    lhs = oracle_gamma(float(lam), float(delta), float(D), d)
    rhs = float((delta - 1) / (4 * D * (ctx.exp(delta - 1) - 1)))
    return lhs, rhs
