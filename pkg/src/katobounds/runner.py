"""Scenario runner behind the CLI: verify pipelines, sweeps, canonical output.

All numeric work lives in the geometry/spectral/kato/hodge modules; this one
wires them together in dependency order and serializes the results in a
deterministic layout (sorted keys, 17-significant-digit floats, fixed row
order) so identical configs reproduce identical files byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import constants as C
from .config import RunConfig
from .geometry import (
    ConformalMetric,
    GridSpec,
    conformal_rho_exact,
    diameter_upper,
    lp_mean,
    make_metric,
    rho_field,
    volume,
)
from .hodge import (
    assemble_hodge1,
    check_betti_bounds,
    check_domination,
    check_trace_comparison,
    form_norm,
    harmonic_dim,
)
from .kato import (
    b_kato_numeric,
    c_kato_numeric,
    check_admissibility,
    check_bkato_bound,
    check_heat_kernel_bound,
    check_kato_bound,
    check_l1_l1,
    check_positivity,
    check_ultracontractivity,
    check_vanishing_criterion,
)
from .params import SpectralParams
from .report import Verdict
from .spectral import (
    DENSE_LIMIT,
    assemble_laplacian,
    eigendecompose,
    min_eig,
    schrodinger_op,
)

ARTIFACT_VERSION = "1.0"

SWEEP_COLUMNS = [
    "value", "rho_minus_mean_p", "well_mean_p", "admitted_weak",
    "weak_lhs", "weak_rhs", "D", "c_kato", "kato_rhs", "b_kato",
    "bkato_rhs", "min_eig_schrodinger", "harmonic_dim", "betti_bound",
]

BOUNDS_COLUMNS = [
    "name", "verdict", "hypothesis_ok", "numeric_lhs", "paper_rhs",
    "margin", "skip_reason",
]


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------

def _canon(obj):
    """Round-trip every float through 17 significant digits and strip numpy
    types so json/csv output is reproducible to the byte."""
    if isinstance(obj, dict):
        return {str(k): _canon(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            return repr(f)
        return float(f"{f:.17g}")
    if isinstance(obj, np.ndarray):
        return [_canon(v) for v in obj.tolist()]
    if isinstance(obj, Verdict):
        return obj.value
    return obj


def manifest_json(manifest: dict) -> str:
    return json.dumps(_canon(manifest), sort_keys=True, indent=2) + "\n"


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_cell(row.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# shared geometry stage
# ---------------------------------------------------------------------------

def build_scene(cfg: RunConfig):
    grid = GridSpec(n=cfg.n, L=cfg.L)
    metric = make_metric(cfg.family, cfg.L, **cfg.metric_params)
    if cfg.family == "flat":
        rho = np.zeros(grid.N)
    elif isinstance(metric, ConformalMetric):
        rho = conformal_rho_exact(metric, grid.nodes())
    else:
        rho = rho_field(metric, grid)
    return grid, metric, rho


def _geometry_summary(cfg: RunConfig, grid, metric, rho, D, vol):
    ana = cfg.analysis
    return {
        "d": grid.d,
        "N": grid.N,
        "h_max": float(grid.h.max()),
        "vol": vol,
        "diameter_upper": D,
        "rho_min": float(rho.min()),
        "rho_max": float(rho.max()),
        "rho_minus_mean_p": lp_mean(np.clip(-rho, 0.0, None), ana["p"],
                                    metric, grid),
    }


# ---------------------------------------------------------------------------
# verify pipeline
# ---------------------------------------------------------------------------

def run_verify(cfg: RunConfig) -> dict:
    """Full check pipeline in dependency order; returns the manifest dict."""
    ana = cfg.analysis
    grid, metric, rho = build_scene(cfg)
    D = diameter_upper(metric, grid)
    vol = volume(metric, grid)
    params = SpectralParams(d=grid.d, delta=ana["delta"], p=ana["p"], D=D,
                            rho0=ana["rho0"])
    Kprime = float(ana["kprime"])
    rho_minus = np.clip(-rho, 0.0, None)
    well = np.clip(ana["rho0"] - rho, 0.0, None)

    lo, hi, cnt = ana["lambda_scan"]
    adm_weak = check_admissibility(metric, grid, ana["delta"], rho, D, "weak")
    adm_gallot = check_admissibility(
        metric, grid, ana["delta"], rho, D, "gallot",
        lambda_scan=np.geomspace(lo, hi, cnt))

    lap_op = assemble_laplacian(metric, grid)
    lap_dec = eigendecompose(lap_op)

    checks = []
    checks.append(check_heat_kernel_bound(lap_dec, params, Kprime, vol,
                                          ana["t_samples"]))
    for alpha in ana["alpha"]:
        checks.append(check_kato_bound(lap_dec, metric, grid, rho_minus,
                                       alpha, params, Kprime))
    for beta in ana["beta"]:
        checks.append(check_bkato_bound(lap_dec, metric, grid, rho_minus,
                                        beta, params, Kprime,
                                        quad_nodes=ana["quad_nodes"]))
    checks.append(check_positivity(lap_op, lap_dec, well, ana["rho0"]))
    checks.append(check_vanishing_criterion(metric, grid, lap_op, lap_dec,
                                            rho, ana["rho0"], ana["p"],
                                            ana["delta"], Kprime, D))
    for beta in ana["beta"]:
        checks.append(check_l1_l1(lap_op, lap_dec, rho, beta,
                                  ana["t_samples"],
                                  quad_nodes=ana["quad_nodes"]))
    beta_u = min(ana["beta"], key=lambda b: abs(b - 1.0))
    checks.append(check_ultracontractivity(
        lap_op, lap_dec, rho, beta_u, params, Kprime, vol,
        t_samples=[t for t in ana["t_samples"] if t >= 0.25] or [1.0],
        quad_nodes=ana["quad_nodes"], seed=ana["seed"]))

    if ana["hodge"]:
        checks.extend(_hodge_stage(cfg, grid, metric, rho, lap_op, lap_dec,
                                   params, Kprime, D, beta_u))

    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "config": _echo(cfg),
        "geometry": _geometry_summary(cfg, grid, metric, rho, D, vol),
        "admissibility": [adm_weak.to_dict(), adm_gallot.to_dict()],
        "checks": [c.to_dict() for c in checks],
        "summary": _summary(checks),
    }
    return manifest


def _hodge_stage(cfg, grid, metric, rho, lap_op, lap_dec, params, Kprime, D,
                 beta):
    ana = cfg.analysis
    hodge = assemble_hodge1(metric, grid)
    unknowns = grid.d * grid.N
    if unknowns <= DENSE_LIMIT:
        hodge_dec = eigendecompose(hodge.as_operator("hodge"))
    else:
        hodge_dec = eigendecompose(hodge.as_operator("hodge"),
                                   count=4 * grid.d)
    dec_schrod = eigendecompose(schrodinger_op(lap_op, rho))

    checks = []
    h2 = float(grid.h.max()) ** 2
    slack = 1e-9 if cfg.family == "flat" else 50.0 * h2
    rng = np.random.default_rng(ana["seed"])
    omega = rng.standard_normal(unknowns)
    omega /= np.abs(omega).max()
    if hodge_dec.full:
        checks.append(check_domination(dec_schrod, hodge, hodge_dec, omega,
                                       ana["t_samples"], slack))
        rel = 0.0 if cfg.family == "flat" else 20.0 * h2
        checks.append(check_trace_comparison(dec_schrod, hodge_dec,
                                             ana["t_samples"],
                                             rel_slack=rel))
    checks.append(check_betti_bounds(metric, grid, lap_dec, hodge_dec, rho,
                                     beta, ana["p"], ana["delta"], Kprime, D,
                                     gap_tol=ana["gap_tol"],
                                     quad_nodes=ana["quad_nodes"]))
    return checks


def _echo(cfg: RunConfig) -> dict:
    from .config import config_echo
    return config_echo(cfg)


def _summary(checks) -> dict:
    counts = {v.value: 0 for v in Verdict}
    for c in checks:
        counts[c.verdict.value] += 1
    return counts


def has_violation(manifest: dict) -> bool:
    return manifest["summary"][Verdict.VIOLATED.value] > 0


# ---------------------------------------------------------------------------
# sweep pipeline
# ---------------------------------------------------------------------------

METRIC_SWEEP_PARAMS = ("eps", "sigma")
ANALYSIS_SWEEP_PARAMS = ("alpha", "beta", "rho0", "delta", "p", "kprime")


def _apply_sweep_value(cfg: RunConfig, parameter: str, value: float) -> RunConfig:
    import dataclasses
    if parameter in METRIC_SWEEP_PARAMS:
        mp = dict(cfg.metric_params)
        mp[parameter] = value
        return dataclasses.replace(cfg, metric_params=mp)
    if parameter in ANALYSIS_SWEEP_PARAMS:
        ana = dict(cfg.analysis)
        if parameter in ("alpha", "beta"):
            ana[parameter] = [value]
        else:
            ana[parameter] = value
        return dataclasses.replace(cfg, analysis=ana)
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def sweep_point(cfg: RunConfig, parameter: str, value: float) -> dict:
    """One sweep row: admissibility, Kato constants vs their explicit bounds,
    Schrodinger min-eig and harmonic dimension at this parameter value."""
    pcfg = _apply_sweep_value(cfg, parameter, value)
    ana = pcfg.analysis
    grid, metric, rho = build_scene(pcfg)
    D = diameter_upper(metric, grid)
    params = SpectralParams(d=grid.d, delta=ana["delta"], p=ana["p"], D=D,
                            rho0=ana["rho0"])
    Kprime = float(ana["kprime"])
    rho_minus = np.clip(-rho, 0.0, None)
    well = np.clip(ana["rho0"] - rho, 0.0, None)
    alpha = ana["alpha"][0]
    beta = min(ana["beta"], key=lambda b: abs(b - 1.0))

    adm = check_admissibility(metric, grid, ana["delta"], rho, D, "weak")
    lap_op = assemble_laplacian(metric, grid)
    lap_dec = eigendecompose(lap_op)
    vnorm = lp_mean(rho_minus, ana["p"], metric, grid)
    c = c_kato_numeric(lap_dec, rho_minus, alpha)
    b = b_kato_numeric(lap_dec, rho_minus, beta, ana["quad_nodes"])
    mineig = min_eig(schrodinger_op(lap_op, rho))

    row = {
        "value": float(value),
        "rho_minus_mean_p": vnorm,
        "well_mean_p": lp_mean(well, ana["p"], metric, grid),
        "admitted_weak": adm.admitted,
        "weak_lhs": adm.lhs,
        "weak_rhs": adm.rhs,
        "D": D,
        "c_kato": c,
        "kato_rhs": C.eval_kato_bound_rhs(vnorm, alpha, params, Kprime),
        "b_kato": b,
        "bkato_rhs": C.eval_bkato_bound_rhs(vnorm, beta, params, Kprime),
        "min_eig_schrodinger": mineig,
        "harmonic_dim": None,
        "betti_bound": None,
    }
    if ana["hodge"]:
        hodge = assemble_hodge1(metric, grid)
        hodge_dec = eigendecompose(hodge.as_operator("hodge"),
                                   count=4 * grid.d)
        count = harmonic_dim(hodge_dec, ana["gap_tol"])
        row["harmonic_dim"] = count.dim
        if count.dim is not None and b < 1.0:
            row["betti_bound"] = C.eval_betti_bound(
                b, beta, params.with_(beta=beta), Kprime)
    return row


def _weak_margin(cfg: RunConfig, parameter: str, value: float) -> float:
    """Signed weak-admissibility margin rhs - lhs (cheap: no eigensolves)."""
    pcfg = _apply_sweep_value(cfg, parameter, value)
    grid, metric, rho = build_scene(pcfg)
    D = diameter_upper(metric, grid)
    adm = check_admissibility(metric, grid, pcfg.analysis["delta"], rho, D,
                              "weak")
    return adm.rhs - adm.lhs


def bracket_admissibility(cfg: RunConfig, parameter: str,
                          lo: float, hi: float,
                          rel_width: float = 1e-3) -> dict:
    """Bisect the weak-admissibility flip between two sweep values to a
    bracket narrower than rel_width of the swept range."""
    span = abs(hi - lo)
    mlo = _weak_margin(cfg, parameter, lo)
    mhi = _weak_margin(cfg, parameter, hi)
    if mlo * mhi > 0:
        raise ValueError("no admissibility flip in the given bracket")
    while abs(hi - lo) > rel_width * span:
        mid = 0.5 * (lo + hi)
        if _weak_margin(cfg, parameter, mid) * mlo > 0:
            lo = mid
        else:
            hi = mid
    return {"parameter": parameter, "lo": float(lo), "hi": float(hi),
            "width": float(abs(hi - lo))}


def run_sweep(cfg: RunConfig) -> dict:
    """Sweep manifest: one row per value plus the admissibility bracketing.

    An empty value list degenerates to a single verify run, echoed as the
    manifest of that run.
    """
    if cfg.sweep is None:
        raise ValueError("sweep section missing from config")
    parameter = cfg.sweep["parameter"]
    values = cfg.sweep["values"]
    if not values:
        inner = run_verify(cfg)
        inner["sweep"] = {"parameter": parameter, "values": [], "rows": []}
        return inner

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(sweep_point, [cfg] * len(values),
                                 [parameter] * len(values), values))
    else:
        rows = [sweep_point(cfg, parameter, v) for v in values]

    crossing = None
    for a, b in zip(rows, rows[1:]):
        if a["admitted_weak"] != b["admitted_weak"]:
            crossing = bracket_admissibility(cfg, parameter,
                                             a["value"], b["value"])
            break

    return {
        "artifact_version": ARTIFACT_VERSION,
        "config": _echo(cfg),
        "sweep": {
            "parameter": parameter,
            "values": [float(v) for v in values],
            "rows": rows,
            "admissibility_crossing": crossing,
        },
        "summary": {
            "points": len(rows),
            "admitted": sum(1 for r in rows if r["admitted_weak"]),
        },
    }


def bounds_rows(manifest: dict) -> list[dict]:
    return [{c: chk.get(c) for c in BOUNDS_COLUMNS}
            for chk in manifest.get("checks", [])]
