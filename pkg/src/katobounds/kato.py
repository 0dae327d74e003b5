"""Numerical Kato constants, admissibility, and the function-level bound checks."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import constants as C
from .geometry import GridSpec, MetricField, lp_mean, volume_weights
from .params import DomainError, SpectralParams
from .report import (AdmissibilityReport, BoundReport, Verdict, aggregate,
                     inequality_verdict)
from .spectral import DiscreteOperator, SpectralDecomposition, eigendecompose, \
    min_eig, schrodinger_op

__all__ = [
    "c_kato_numeric",
    "b_kato_numeric",
    "check_admissibility",
    "check_heat_kernel_bound",
    "check_kato_bound",
    "check_bkato_bound",
    "check_positivity",
    "check_vanishing_criterion",
    "check_l1_l1",
    "check_ultracontractivity",
]

NEG_TOL = 1e-12


def _require_nonneg(V: np.ndarray, what: str = "potential"):
    V = np.asarray(V, dtype=float)
    if V.min() < -NEG_TOL:
        raise DomainError(f"{what} must be nonnegative, min = {V.min():g}")
    return np.clip(V, 0.0, None)


def c_kato_numeric(dec: SpectralDecomposition, V: np.ndarray, alpha: float) -> float:
    """sup-norm of (L + alpha)^-1 V for a nonnegative bounded potential.

    Discrete fields are bounded, so the truncation sup over V ^ n is attained
    and omitted.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    V = _require_nonneg(V)
    return float(np.abs(dec.resolvent_apply(alpha, V)).max())


def _gauss_panels(a: float, b: float, panels: int, nodes: int):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    ts, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        ts.append(half * xg + 0.5 * (hi + lo))
        ws.append(half * wg)
    return np.concatenate(ts), np.concatenate(ws)


def b_kato_numeric(dec: SpectralDecomposition, V: np.ndarray, beta: float,
                   quad_nodes: int = 32) -> float:
    """integral_0^beta ||e^(-t L) V||_inf dt by composite Gauss-Legendre.

    The integrand is smooth down to t = 0 for bounded V (value ||V||_inf).
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    V = _require_nonneg(V)
    ts, ws = _gauss_panels(0.0, beta, panels=4, nodes=max(4, quad_nodes // 4))
    coeff = dec.coeffs(V)
    vals = np.abs(
        dec.vectors @ (np.exp(-np.outer(dec.eigenvalues, ts)) * coeff[:, None])
    ).max(axis=0)
    return float(np.dot(ws, vals))


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

def _gallot_lhs(rho: np.ndarray, w: np.ndarray, lam: float, d: int,
                delta: float) -> float:
    rho_minus = np.clip(-rho, 0.0, None)
    integrand = np.clip(rho_minus / (d - 1.0) - lam ** 2, 0.0, None) ** (delta / 2.0)
    return float(np.sum(w * integrand) / w.sum())


def check_admissibility(
    metric: MetricField,
    grid: GridSpec,
    delta: float,
    rho: np.ndarray,
    D: float,
    which: str = "weak",
    lambda_opt: float | None = None,
    lambda_scan: np.ndarray | None = None,
) -> AdmissibilityReport:
    """Membership test for the admissibility classes.

    ``weak``: L^(delta/2)-mean of rho_- against the lambda-free threshold.
    ``gallot``: level-set mean against the curvature-condition RHS, either at
    a supplied lambda or at the best lambda of a scan.
    """
    d = grid.d
    if not delta > d:
        raise DomainError(f"delta must exceed d={d}, got {delta}")
    params = SpectralParams(d=d, delta=delta, D=D)
    if which == "weak":
        rho_minus = np.clip(-np.asarray(rho, dtype=float), 0.0, None)
        lhs = lp_mean(rho_minus, delta / 2.0, metric, grid)
        rhs = C.eval_weak_threshold(params)
        return AdmissibilityReport(
            which="weak", delta=delta, D_used=D, d=d, lam=None,
            lhs=lhs, rhs=rhs, admitted=bool(lhs <= rhs * (1 + 1e-9)),
        )
    if which != "gallot":
        raise DomainError(f"unknown admissibility mode {which!r}")
    w = volume_weights(metric, grid)
    if lambda_opt is not None:
        lams = np.asarray([lambda_opt], dtype=float)
    else:
        lams = (lambda_scan if lambda_scan is not None
                else np.geomspace(1e-2, 1e3, 200))
    best = None
    for lam in lams:
        lhs = _gallot_lhs(rho, w, float(lam), d, delta)
        rhs = C.eval_gallot_rhs(params.with_(lam=float(lam)))
        margin = rhs - lhs
        if best is None or margin > best[0]:
            best = (margin, float(lam), lhs, rhs)
    _, lam, lhs, rhs = best
    return AdmissibilityReport(
        which="gallot", delta=delta, D_used=D, d=d, lam=lam,
        lhs=lhs, rhs=rhs, admitted=bool(lhs <= rhs * (1 + 1e-9)),
    )


# ---------------------------------------------------------------------------
# bound checks (each one paper inequality; VIOLATED is data, not an error)
# ---------------------------------------------------------------------------

def _active_times(dec: SpectralDecomposition, t_samples) -> tuple[list, float]:
    t_floor = dec.t_min()
    return list(np.asarray(t_samples, dtype=float)), t_floor


def check_heat_kernel_bound(
    dec: SpectralDecomposition,
    params: SpectralParams,
    Kprime: float,
    vol: float,
    t_samples,
    use_lambda_variant: bool = False,
) -> BoundReport:
    """Heat-kernel sup against (1 + K D^(delta/2))/Vol * t^(-delta/2)."""
    if use_lambda_variant:
        kterm = C.eval_K_lambda(params, Kprime)
    else:
        kterm = C.eval_K(params, Kprime) * params.D ** (params.delta / 2.0)
    ts, t_floor = _active_times(dec, t_samples)
    rows = []
    for t in ts:
        if t < t_floor:
            rows.append({"t": t, "lhs": None, "rhs": None,
                         "verdict": Verdict.SKIPPED.value,
                         "reason": f"below mesh floor t_min={t_floor:.4g}"})
            continue
        lhs = dec.heat_kernel_sup(t)
        rhs = (1.0 + kterm) / vol * t ** (-params.delta / 2.0)
        rows.append({"t": t, "lhs": lhs, "rhs": rhs,
                     "verdict": inequality_verdict(lhs, rhs).value})
    return aggregate(
        "heat_kernel_bound", rows,
        provenance={"delta": params.delta, "D": params.D, "Kprime": Kprime,
                    "vol": vol, "variant": "lambda" if use_lambda_variant else "delta",
                    "t_min": t_floor},
    )


def check_kato_bound(
    dec: SpectralDecomposition,
    metric: MetricField,
    grid: GridSpec,
    V: np.ndarray,
    alpha: float,
    params: SpectralParams,
    Kprime: float,
    use_lambda_variant: bool = False,
) -> BoundReport:
    """c_Kato(V, alpha) against its explicit L^p bound."""
    params.require_p()
    V = _require_nonneg(V)
    lhs = c_kato_numeric(dec, V, alpha)
    vnorm = lp_mean(V, params.p, metric, grid)
    rhs = C.eval_kato_bound_rhs(vnorm, alpha, params, Kprime, use_lambda_variant)
    return BoundReport(
        name="kato_bound",
        hypothesis_ok=True,
        numeric_lhs=lhs,
        paper_rhs=rhs,
        margin=rhs - lhs,
        verdict=inequality_verdict(lhs, rhs),
        provenance={"alpha": alpha, "p": params.p, "delta": params.delta,
                    "D": params.D, "Kprime": Kprime, "V_mean_p": vnorm,
                    "variant": "lambda" if use_lambda_variant else "delta"},
    )


def check_bkato_bound(
    dec: SpectralDecomposition,
    metric: MetricField,
    grid: GridSpec,
    V: np.ndarray,
    beta: float,
    params: SpectralParams,
    Kprime: float,
    use_lambda_variant: bool = False,
    quad_nodes: int = 32,
) -> BoundReport:
    """b_Kato(V, beta) against its explicit L^p bound."""
    params.require_p()
    V = _require_nonneg(V)
    lhs = b_kato_numeric(dec, V, beta, quad_nodes)
    vnorm = lp_mean(V, params.p, metric, grid)
    rhs = C.eval_bkato_bound_rhs(vnorm, beta, params, Kprime, use_lambda_variant)
    return BoundReport(
        name="bkato_bound",
        hypothesis_ok=True,
        numeric_lhs=lhs,
        paper_rhs=rhs,
        margin=rhs - lhs,
        verdict=inequality_verdict(lhs, rhs),
        provenance={"beta": beta, "p": params.p, "delta": params.delta,
                    "D": params.D, "Kprime": Kprime, "V_mean_p": vnorm,
                    "variant": "lambda" if use_lambda_variant else "delta"},
    )


def check_positivity(
    lap_op: DiscreteOperator,
    lap_dec: SpectralDecomposition,
    W: np.ndarray,
    alpha: float,
    form_tol: float = 1e-9,
) -> BoundReport:
    """c_Kato(W, alpha) < 1 must force L + alpha - W > 0.

    Also checks the quadratic-form inequality W <= c (L + alpha) through the
    smallest eigenvalue of c (L + alpha) - W.
    """
    W = _require_nonneg(W, "W")
    c = c_kato_numeric(lap_dec, W, alpha)
    shifted = schrodinger_op(lap_op, alpha - W)
    mineig = min_eig(shifted)
    # quadratic-form constant: min-eig(c (L + alpha) - W) >= -tol
    form_matrix = c * lap_op.matrix + sp.diags(c * alpha - W)
    form_mineig = min_eig(DiscreteOperator(matrix=form_matrix.tocsr(),
                                           weights=lap_op.weights,
                                           grid=lap_op.grid))
    hypothesis_ok = c < 1.0
    if not hypothesis_ok:
        verdict = Verdict.SKIPPED
        reason = f"c_Kato = {c:.6g} >= 1"
    elif mineig > 0 and form_mineig >= -form_tol * max(1.0, abs(c)):
        verdict, reason = Verdict.VERIFIED, None
    else:
        verdict, reason = Verdict.VIOLATED, None
    return BoundReport(
        name="positivity",
        hypothesis_ok=hypothesis_ok,
        numeric_lhs=c,
        paper_rhs=1.0,
        margin=1.0 - c,
        verdict=verdict,
        skip_reason=reason,
        provenance={"alpha": alpha, "min_eig": mineig,
                    "form_min_eig": form_mineig},
    )


def check_vanishing_criterion(
    metric: MetricField,
    grid: GridSpec,
    lap_op: DiscreteOperator,
    lap_dec: SpectralDecomposition,
    rho: np.ndarray,
    rho0: float,
    p: float,
    delta: float,
    Kprime: float,
    D: float,
) -> BoundReport:
    """Vanishing-criterion hypothesis; when it holds, L + rho must be positive."""
    d = grid.d
    if not (3 <= d < delta < 2 * p):
        raise DomainError(f"requires 3 <= d < delta < 2p, got d={d}, "
                          f"delta={delta}, p={p}")
    params = SpectralParams(d=d, delta=delta, p=p, D=D, rho0=rho0)
    W = np.clip(rho0 - np.asarray(rho, dtype=float), 0.0, None)
    lhs = lp_mean(W, p, metric, grid)
    rhs = C.eval_er_threshold(rho0, p, params, Kprime)
    # delta = p + d/2 auto-selection variant of the follow-up corollary
    auto_delta = p + d / 2.0
    auto_params = params.with_(delta=auto_delta)
    auto_rhs = min(
        C.eval_c_pd(p, d) / D ** 2,
        C.eval_er_threshold(rho0, p, auto_params, Kprime),
    )
    prov = {"rho0": rho0, "p": p, "delta": delta, "D": D, "Kprime": Kprime,
            "auto_delta": auto_delta, "auto_threshold": auto_rhs}
    if rho0 <= 1.0:
        prov["auto_threshold_simplified"] = min(
            C.eval_c_pd(p, d) / D ** 2,
            C.eval_er_threshold(rho0, p, auto_params, Kprime, simplified=True),
        )
    hypothesis_ok = lhs < rhs
    if not hypothesis_ok:
        return BoundReport(
            name="vanishing_criterion", hypothesis_ok=False, numeric_lhs=lhs,
            paper_rhs=rhs, margin=rhs - lhs, verdict=Verdict.SKIPPED,
            skip_reason="L^p-mean of (rho - rho0)_- above threshold",
            provenance=prov,
        )
    mineig = min_eig(schrodinger_op(lap_op, np.asarray(rho, dtype=float)))
    prov["min_eig_schrodinger"] = mineig
    return BoundReport(
        name="vanishing_criterion", hypothesis_ok=True, numeric_lhs=lhs,
        paper_rhs=rhs, margin=rhs - lhs,
        verdict=Verdict.VERIFIED if mineig > 0 else Verdict.VIOLATED,
        provenance=prov,
    )


def _l1_norm_of_kernel(dec: SpectralDecomposition, t: float) -> float:
    """||e^(-t H)||_{1->1} = max_y sum_x w_x |k(t,x,y)| (weighted column sums)."""
    k = dec.heat_kernel_matrix(t)
    return float((dec.weights[:, None] * np.abs(k)).sum(axis=0).max())


def check_l1_l1(
    lap_op: DiscreteOperator,
    lap_dec: SpectralDecomposition,
    V: np.ndarray,
    beta: float,
    t_samples,
    quad_nodes: int = 32,
) -> BoundReport:
    """||e^(-t(L+V))||_{1->1} against C e^(omega t).

    The positive part of V is dropped by domination (the dropped-V norm
    bounds the full-V norm, which is recorded alongside).
    """
    V = np.asarray(V, dtype=float)
    v_minus = np.clip(-V, 0.0, None)
    b = b_kato_numeric(lap_dec, v_minus, beta, quad_nodes)
    prov = {"beta": beta, "b_kato": b}
    if b >= 1.0:
        return BoundReport(
            name="l1_l1", hypothesis_ok=False, numeric_lhs=None, paper_rhs=None,
            verdict=Verdict.SKIPPED, skip_reason=f"b_Kato = {b:.6g} >= 1",
            provenance=prov,
        )
    Cv, omega = C.eval_voigt(b, beta)
    dec_drop = eigendecompose(schrodinger_op(lap_op, -v_minus))
    dec_full = eigendecompose(schrodinger_op(lap_op, V))
    rows = []
    for t in np.asarray(t_samples, dtype=float):
        lhs = _l1_norm_of_kernel(dec_drop, t)
        lhs_full = _l1_norm_of_kernel(dec_full, t)
        rhs = Cv * np.exp(omega * t)
        row = {"t": float(t), "lhs": lhs, "rhs": rhs,
               "lhs_full_V": lhs_full,
               "verdict": inequality_verdict(lhs, rhs).value}
        if lhs_full > lhs * (1 + 1e-9):
            row["verdict"] = Verdict.VIOLATED.value
            row["reason"] = "full-V norm exceeds dropped-V norm"
        rows.append(row)
    prov.update({"C": Cv, "omega": omega})
    return aggregate("l1_l1", rows, provenance=prov)


def check_ultracontractivity(
    lap_op: DiscreteOperator,
    lap_dec: SpectralDecomposition,
    V: np.ndarray,
    beta: float,
    params: SpectralParams,
    Kprime: float,
    vol: float,
    p_values=(1.0, 2.0, np.inf),
    t_samples=(0.25, 0.5, 1.0),
    quad_nodes: int = 32,
    n_probes: int = 16,
    seed: int = 0,
) -> BoundReport:
    """||e^(-t(L+V))||_{p,inf} against the explicit ultracontractivity bound.

    Exact norms at p = 1 (kernel sup) and p = inf (weighted row sums); for
    interior p only a probe lower bound is computed and labeled as such.
    """
    V = np.asarray(V, dtype=float)
    v_minus = np.clip(-V, 0.0, None)
    b = b_kato_numeric(lap_dec, v_minus, beta, quad_nodes)
    prov = {"beta": beta, "b_kato": b, "vol": vol, "Kprime": Kprime,
            "delta": params.delta}
    if b >= 1.0:
        return BoundReport(
            name="ultracontractivity", hypothesis_ok=False, numeric_lhs=None,
            paper_rhs=None, verdict=Verdict.SKIPPED,
            skip_reason=f"b_Kato = {b:.6g} >= 1", provenance=prov,
        )
    c_ultra = C.eval_ultra_constant(b, beta, params, Kprime, vol)
    dec_v = eigendecompose(schrodinger_op(lap_op, V))
    t_floor = dec_v.t_min()
    rng = np.random.default_rng(seed)
    rows = []
    for t in np.asarray(t_samples, dtype=float):
        if t < t_floor:
            rows.append({"t": float(t), "lhs": None, "rhs": None,
                         "verdict": Verdict.SKIPPED.value,
                         "reason": f"below mesh floor t_min={t_floor:.4g}"})
            continue
        k = dec_v.heat_kernel_matrix(t)
        for p in p_values:
            p = float(p)
            if p == 1.0:
                lhs, kind = float(np.abs(k).max()), "exact"
            elif np.isinf(p):
                lhs = float((np.abs(k) * dec_v.weights[None, :]).sum(axis=1).max())
                kind = "exact"
            else:
                lhs, kind = 0.0, "probe-lower-bound"
                for _ in range(n_probes):
                    f = rng.standard_normal(lap_op.N)
                    num = float(np.abs(k @ (dec_v.weights * f)).max())
                    den = float((dec_v.weights @ np.abs(f) ** p) ** (1.0 / p))
                    lhs = max(lhs, num / den)
            pinv = 0.0 if np.isinf(p) else 1.0 / p
            rhs = ((1.0 / (1.0 - b)) ** ((1.0 + t / beta) * (1.0 - pinv))
                   * (c_ultra * t ** (-params.delta / 2.0)) ** pinv)
            rows.append({"t": float(t), "p": ("inf" if np.isinf(p) else p),
                         "kind": kind, "lhs": lhs, "rhs": rhs,
                         "verdict": inequality_verdict(lhs, rhs).value})
    prov.update({"c_ultra": c_ultra, "t_min": t_floor})
    return aggregate("ultracontractivity", rows, provenance=prov)
