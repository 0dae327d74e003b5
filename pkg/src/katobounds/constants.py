"""Closed-form evaluators for every explicit constant of the curvature estimates.

Pure double-precision arithmetic, no discretization.  Each function raises
DomainError when a standing hypothesis fails; none of them returns NaN.
A high-precision, independently written re-evaluation of the same formulas
lives in :mod:`katobounds.oracle`.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

from .params import ConstantBundle, DomainError, SpectralParams

__all__ = [
    "eval_B",
    "eval_gamma",
    "eval_gallot_rhs",
    "eval_weak_threshold",
    "eval_K",
    "eval_K_lambda",
    "eval_I",
    "eval_J",
    "eval_c_pd",
    "eval_voigt",
    "eval_kappa0_k",
    "eval_ultra_constant",
    "eval_betti_bound",
    "eval_cbar_and_betti_lp",
    "eval_kato_bound_rhs",
    "eval_bkato_bound_rhs",
    "eval_er_threshold",
    "bundle",
]


def eval_B(params: SpectralParams) -> float:
    """Structural constant B(delta, d) of the isoperimetric heat-kernel bound.

    B = (2(delta-1)/delta)^(1/2) * (d-1)^(1-1/delta)
        * ((delta-2)/(delta-d))^(1/2-1/delta).
    """
    d, delta = params.d, params.delta
    return (
        math.sqrt(2.0 * (delta - 1.0) / delta)
        * (d - 1.0) ** (1.0 - 1.0 / delta)
        * ((delta - 2.0) / (delta - d)) ** (0.5 - 1.0 / delta)
    )


def eval_gamma(params: SpectralParams) -> float:
    """Rescaling rate gamma = B*lam*min{2^(-1/(delta-1)), 1/(4(e^(lam*B*D)-1))}."""
    B = eval_B(params)
    delta, lam, D = params.delta, params.lam, params.D
    branch_a = 2.0 ** (-1.0 / (delta - 1.0))
    x = lam * B * D
    branch_b = 0.25 / math.expm1(x) if x < 700.0 else 0.25 * math.exp(-x)
    return B * lam * min(branch_a, branch_b)


def eval_gallot_rhs(params: SpectralParams) -> float:
    """Right-hand side (lam^delta / (e^(lam*B*D)-1)) / 2 of the curvature condition."""
    B = eval_B(params)
    x = params.lam * B * params.D
    # in log space past the expm1 overflow point, where expm1(x) ~ e^x
    if x >= 700.0:
        logv = math.log(0.5) + params.delta * math.log(params.lam) - x
        return math.exp(logv) if logv > -745.0 else 0.0
    return 0.5 * params.lam ** params.delta / math.expm1(x)


def eval_weak_threshold(params: SpectralParams) -> float:
    """Admissibility threshold on the L^(delta/2)-mean of the negative Ricci part.

    (d-1) * (2(e^(delta-1)-1))^(-2/delta) * ((delta-1)/(B*D))^2
    """
    B = eval_B(params)
    d, delta, D = params.d, params.delta, params.D
    return (
        (d - 1.0)
        * (2.0 * math.expm1(delta - 1.0)) ** (-2.0 / delta)
        * ((delta - 1.0) / (B * D)) ** 2
    )


def eval_K(params: SpectralParams, Kprime: float = 1.0) -> float:
    """Lambda-free kernel constant K(delta) = K' * (4(e^(delta-1)-1)/(delta-1))^(delta/2)."""
    if not Kprime > 0:
        raise DomainError(f"Kprime must be positive, got {Kprime}")
    delta = params.delta
    return Kprime * (4.0 * math.expm1(delta - 1.0) / (delta - 1.0)) ** (delta / 2.0)


def eval_K_lambda(params: SpectralParams, Kprime: float = 1.0) -> float:
    """Level-dependent kernel constant K(lam, delta, D, d) = K' * gamma^(-delta/2)."""
    if not Kprime > 0:
        raise DomainError(f"Kprime must be positive, got {Kprime}")
    return Kprime * eval_gamma(params) ** (-params.delta / 2.0)


def _check_singularity_exponent(delta: float, p: float):
    s = delta / (2.0 * p)
    if not 0.0 < s < 1.0:
        raise DomainError(f"requires 0 < delta/2p < 1, got delta={delta}, p={p}")
    return s


def eval_I(alpha: float, delta: float, p: float, reltol: float = 1e-10) -> float:
    """I(alpha, delta, p) = integral_0^inf e^(-alpha*t) (t^(-delta/2p) v 1) dt.

    The singular piece over (0, 1] is integrated after the substitution
    u = t^(1-delta/2p), which removes the algebraic singularity; the tail
    over (1, inf) is exactly e^(-alpha)/alpha.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    s = _check_singularity_exponent(delta, p)
    inv = 1.0 / (1.0 - s)
    head, _ = quad(lambda u: math.exp(-alpha * u ** inv), 0.0, 1.0,
                   epsrel=reltol, epsabs=0.0, limit=200)
    return inv * head + math.exp(-alpha) / alpha


def eval_J(beta: float, delta: float, p: float) -> float:
    """J(beta, delta, p) = integral_0^beta (t^(-delta/2p) v 1) dt, in closed form."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    _check_singularity_exponent(delta, p)
    head = 2.0 * p / (2.0 * p - delta)
    if beta <= 1.0:
        return head * beta ** ((2.0 * p - delta) / (2.0 * p))
    return head + beta - 1.0


def eval_c_pd(p: float, d: int) -> float:
    """Delta-free admissibility constant c(p, d), evaluated at delta = p + d/2.

    c(p,d) = (d-1) * ((p+d/2-1)/B(p+d/2,d))^2 * (2(e^(p+d/2-1)-1))^(-4/(2p+d-2))
    """
    if not p > d / 2.0:
        raise DomainError(f"requires p > d/2, got p={p}, d={d}")
    delta = p + d / 2.0
    B = eval_B(SpectralParams(d=d, delta=delta, p=p))
    return (
        (d - 1.0)
        * ((delta - 1.0) / B) ** 2
        * (2.0 * math.expm1(delta - 1.0)) ** (-4.0 / (2.0 * p + d - 2.0))
    )


def eval_voigt(b: float, beta: float) -> tuple[float, float]:
    """Perturbation-series constants (C, omega) = (1/(1-b), log(1/(1-b))/beta)."""
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    C = 1.0 / (1.0 - b)
    return C, math.log(C) / beta


def eval_kappa0_k(b: float) -> tuple[float, int]:
    """Auxiliary exponents: kappa0 = (1 + 1/b)/2 and the integer conjugate k.

    k is the smallest integer >= (1+b)/(1-b); the interval
    [(1+b)/(1-b), 2/(1-b)] has length one, so it always contains k.
    """
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    kappa0 = math.inf if b == 0.0 else 0.5 * (1.0 + 1.0 / b)
    k = max(1, math.ceil((1.0 + b) / (1.0 - b)))
    return kappa0, k


def _ultra_exponent(b: float, beta: float, delta: float) -> float:
    return (1.0 + 1.0 / beta) * (1.0 + b) / (1.0 - b) + delta / 2.0


def _kernel_term(params: SpectralParams, Kprime: float, use_lambda_variant: bool) -> float:
    """The additive kernel factor: K(delta)*D^(delta/2), or K(lam,...) in the variant."""
    if use_lambda_variant:
        return eval_K_lambda(params, Kprime)
    return eval_K(params, Kprime) * params.D ** (params.delta / 2.0)


def eval_ultra_constant(
    b: float,
    beta: float,
    params: SpectralParams,
    Kprime: float = 1.0,
    vol: float = 1.0,
    use_lambda_variant: bool = False,
) -> float:
    """Ultracontractivity constant c(b, beta, delta, D, d, Vol).

    [2/(1-b)]^((1+1/beta)(1+b)/(1-b) + delta/2) * (1 + K*D^(delta/2)) / Vol
    """
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not vol > 0:
        raise DomainError(f"vol must be positive, got {vol}")
    base = 2.0 / (1.0 - b)
    return (
        base ** _ultra_exponent(b, beta, params.delta)
        * (1.0 + _kernel_term(params, Kprime, use_lambda_variant))
        / vol
    )


def eval_betti_bound(
    b: float,
    beta: float,
    params: SpectralParams,
    Kprime: float = 1.0,
    use_lambda_variant: bool = False,
) -> float:
    """First-Betti-number bound d * [2/(1-b)]^(...) * (1 + K(delta)D^(delta/2))."""
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    base = 2.0 / (1.0 - b)
    return (
        params.d
        * base ** _ultra_exponent(b, beta, params.delta)
        * (1.0 + _kernel_term(params, Kprime, use_lambda_variant))
    )


def eval_cbar_and_betti_lp(
    rho_norm_p: float,
    p: float,
    params: SpectralParams,
    Kprime: float = 1.0,
) -> tuple[float, float | None]:
    """L^p-mean Betti bound: cbar and the bound, or None when the hypothesis fails.

    cbar = 2p/(2p-delta) * (1 + K(delta)D^(delta/2))^(1/p); the bound applies
    when cbar * rho_norm_p < 1 and equals the generic Betti bound at
    b = cbar * rho_norm_p, beta = 1.
    """
    if rho_norm_p < 0:
        raise DomainError(f"rho_norm_p must be nonnegative, got {rho_norm_p}")
    pp = params.with_(p=p)
    pp.require_p()
    kterm = _kernel_term(pp, Kprime, use_lambda_variant=False)
    cbar = 2.0 * p / (2.0 * p - pp.delta) * (1.0 + kterm) ** (1.0 / p)
    b = cbar * rho_norm_p
    if b >= 1.0:
        return cbar, None
    return cbar, eval_betti_bound(b, 1.0, pp, Kprime)


def eval_kato_bound_rhs(
    V_norm_p: float,
    alpha: float,
    params: SpectralParams,
    Kprime: float = 1.0,
    use_lambda_variant: bool = False,
    reltol: float = 1e-10,
) -> float:
    """Resolvent-constant bound (1 + K*D^(delta/2))^(1/p) * I(alpha,delta,p) * |V|_p."""
    if V_norm_p < 0:
        raise DomainError(f"V_norm_p must be nonnegative, got {V_norm_p}")
    params.require_p()
    kterm = _kernel_term(params, Kprime, use_lambda_variant)
    return (
        (1.0 + kterm) ** (1.0 / params.p)
        * eval_I(alpha, params.delta, params.p, reltol)
        * V_norm_p
    )


def eval_bkato_bound_rhs(
    V_norm_p: float,
    beta: float,
    params: SpectralParams,
    Kprime: float = 1.0,
    use_lambda_variant: bool = False,
) -> float:
    """Time-integral bound (1 + K*D^(delta/2))^(1/p) * J(beta,delta,p) * |V|_p."""
    if V_norm_p < 0:
        raise DomainError(f"V_norm_p must be nonnegative, got {V_norm_p}")
    params.require_p()
    kterm = _kernel_term(params, Kprime, use_lambda_variant)
    return (
        (1.0 + kterm) ** (1.0 / params.p)
        * eval_J(beta, params.delta, params.p)
        * V_norm_p
    )


def eval_er_threshold(
    rho0: float,
    p: float,
    params: SpectralParams,
    Kprime: float = 1.0,
    simplified: bool = False,
    reltol: float = 1e-10,
) -> float:
    """Vanishing-criterion threshold on the L^p-mean of (rho - rho0)_-.

    Standard form: (1 + K(delta)D^(delta/2))^(-1/p) / I(rho0, delta, p).
    With ``simplified=True`` (valid for rho0 in (0, 1]), the delta = p + d/2
    closed form (2p-d)/(6p-d) * rho0^((2p-d)/4p)
    * (1 + K(p+d/2)D^((2p+d)/4))^(-1/p) is returned instead.
    """
    if not rho0 > 0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    if simplified:
        d = params.d
        if not p > d / 2.0:
            raise DomainError(f"requires p > d/2, got p={p}, d={d}")
        pp = params.with_(delta=p + d / 2.0, p=p)
        kterm = eval_K(pp, Kprime) * params.D ** ((2.0 * p + d) / 4.0)
        return (
            (2.0 * p - d) / (6.0 * p - d)
            * rho0 ** ((2.0 * p - d) / (4.0 * p))
            * (1.0 + kterm) ** (-1.0 / p)
        )
    pp = params.with_(p=p)
    pp.require_p()
    kterm = _kernel_term(pp, Kprime, use_lambda_variant=False)
    return (1.0 + kterm) ** (-1.0 / p) / eval_I(rho0, pp.delta, p, reltol)


def bundle(
    params: SpectralParams,
    Kprime: float = 1.0,
    b: float = 0.0,
    vol: float = 1.0,
    rho_norm_p: float = 0.0,
) -> ConstantBundle:
    """Evaluate every constant at one parameter tuple (for reports and the CLI)."""
    params.require_p()
    C, omega = eval_voigt(b, params.beta)
    kappa0, k = eval_kappa0_k(b)
    cbar, _ = eval_cbar_and_betti_lp(rho_norm_p, params.p, params, Kprime)
    return ConstantBundle(
        B=eval_B(params),
        gamma=eval_gamma(params),
        Kprime=Kprime,
        K_delta=eval_K(params, Kprime),
        K_lambda=eval_K_lambda(params, Kprime),
        I_val=eval_I(params.alpha, params.delta, params.p),
        J_val=eval_J(params.beta, params.delta, params.p),
        c_pd=eval_c_pd(params.p, params.d),
        C_voigt=C,
        omega_voigt=omega,
        kappa0=kappa0,
        k_conj=k,
        c_ultra=eval_ultra_constant(b, params.beta, params, Kprime, vol),
        cbar=cbar,
        weak_threshold=eval_weak_threshold(params),
        gallot_rhs=eval_gallot_rhs(params),
        er_threshold=eval_er_threshold(params.rho0, params.p, params, Kprime),
        betti_bound=eval_betti_bound(b, params.beta, params, Kprime),
        params=params,
    )
