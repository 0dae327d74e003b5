"""Command-line entry points: constants, verify, sweep, oracle.

Exit codes: 0 = run completed with no VIOLATED verdict (SKIPPED is not a
failure), 1 = violated inequality or infrastructure failure, 2 = usage or
configuration error.  All structured output is deterministic: sorted keys,
17-significant-digit floats, fixed row order; timing goes to stderr only.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from pathlib import Path

import click

from . import constants as C
from . import oracle as O
from .config import ConfigError, load_config
from .params import DomainError, SpectralParams
from .runner import (
    BOUNDS_COLUMNS,
    SWEEP_COLUMNS,
    bounds_rows,
    has_violation,
    manifest_json,
    rows_to_csv,
    run_sweep,
    run_verify,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


@click.group()
def main():
    """Explicit Kato-type bounds under integral curvature assumptions,
    cross-validated on discretized torus geometries."""


def _load(config_path: str, out, workers, kprime, seed):
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    if out is not None:
        cfg = dataclasses.replace(cfg, out_dir=Path(out))
    if workers is not None:
        cfg = dataclasses.replace(cfg, workers=int(workers))
    ana = dict(cfg.analysis)
    if kprime is not None:
        ana["kprime"] = float(kprime)
    if seed is not None:
        ana["seed"] = int(seed)
    return dataclasses.replace(cfg, analysis=ana)


def _run_guarded(fn, cfg):
    t0 = time.monotonic()
    try:
        manifest = fn(cfg)
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_FAILED)
    click.echo(f"completed in {time.monotonic() - t0:.1f} s", err=True)
    return manifest


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    click.echo(f"wrote {path}", err=True)


@main.command()
@click.option("--d", type=int, default=3, show_default=True)
@click.option("--delta", type=float, required=True)
@click.option("--p", type=float, default=4.0, show_default=True)
@click.option("--dd", "--D", "D", type=float, default=1.0, show_default=True,
              help="Diameter bound D.")
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--rho0", type=float, default=1.0, show_default=True)
@click.option("--kprime", type=float, default=1.0, show_default=True)
@click.option("--b", type=float, default=0.0, show_default=True,
              help="Kato constant b for the semigroup-growth constants.")
@click.option("--vol", type=float, default=1.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def constants(d, delta, p, D, lam, alpha, beta, rho0, kprime, b, vol, as_json):
    """Print every explicit constant at one parameter tuple."""
    try:
        params = SpectralParams(d=d, delta=delta, p=p, D=D, lam=lam,
                                alpha=alpha, beta=beta, rho0=rho0)
        bundle = C.bundle(params, Kprime=kprime, b=b, vol=vol)
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    fields = {f.name: getattr(bundle, f.name)
              for f in dataclasses.fields(bundle) if f.name != "params"}
    if as_json:
        import math
        out = {k: (v if isinstance(v, int)
                   else float(f"{v:.17g}") if math.isfinite(v) else repr(v))
               for k, v in fields.items()}
        out["params"] = {k: getattr(params, k) for k in
                         ("d", "delta", "p", "D", "lam", "alpha", "beta", "rho0")}
        click.echo(json.dumps(out, sort_keys=True, indent=2))
    else:
        for name in sorted(fields):
            click.echo(f"{name:>16s}  {fields[name]:.12g}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--kprime", type=float, default=None)
@click.option("--json", "as_json", is_flag=True,
              help="Print the manifest to stdout as well.")
def verify(config_path, out, workers, seed, kprime, as_json):
    """Run the full check pipeline and write manifest, bounds.csv, figure."""
    cfg = _load(config_path, out, workers, kprime, seed)
    manifest = _run_guarded(run_verify, cfg)
    text = manifest_json(manifest)
    _write(cfg.out_dir / "manifest.json", text)
    _write(cfg.out_dir / "bounds.csv",
           rows_to_csv(bounds_rows(manifest), BOUNDS_COLUMNS))
    if cfg.figures:
        from .figures import render_bounds_figure
        render_bounds_figure(manifest["checks"], cfg.out_dir / "bounds.png")
        click.echo(f"wrote {cfg.out_dir / 'bounds.png'}", err=True)
    if as_json:
        click.echo(text, nl=False)
    s = manifest["summary"]
    click.echo(f"verified={s['VERIFIED']} violated={s['VIOLATED']} "
               f"skipped={s['SKIPPED']}", err=True)
    sys.exit(EXIT_FAILED if has_violation(manifest) else EXIT_OK)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--kprime", type=float, default=None)
@click.option("--json", "as_json", is_flag=True)
def sweep(config_path, out, workers, seed, kprime, as_json):
    """Run a parameter sweep and write manifest, sweep.csv, figure."""
    cfg = _load(config_path, out, workers, kprime, seed)
    if cfg.sweep is None:
        click.echo("error: invalid config: sweep section missing", err=True)
        sys.exit(EXIT_USAGE)
    manifest = _run_guarded(run_sweep, cfg)
    text = manifest_json(manifest)
    _write(cfg.out_dir / "manifest.json", text)
    rows = manifest["sweep"]["rows"]
    if rows:
        _write(cfg.out_dir / "sweep.csv", rows_to_csv(rows, SWEEP_COLUMNS))
        if cfg.figures:
            from .figures import render_sweep_figure
            render_sweep_figure(rows, manifest["sweep"]["parameter"],
                                cfg.out_dir / "sweep.png")
            click.echo(f"wrote {cfg.out_dir / 'sweep.png'}", err=True)
    else:
        _write(cfg.out_dir / "bounds.csv",
               rows_to_csv(bounds_rows(manifest), BOUNDS_COLUMNS))
    if as_json:
        click.echo(text, nl=False)
    violated = "checks" in manifest and has_violation(manifest)
    sys.exit(EXIT_FAILED if violated else EXIT_OK)


@main.command()
@click.option("--d", type=int, default=3, show_default=True)
@click.option("--delta", type=float, default=4.0, show_default=True)
@click.option("--p", type=float, default=4.0, show_default=True)
@click.option("--dd", "--D", "D", type=float, default=1.0, show_default=True)
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--b", type=float, default=0.5, show_default=True)
@click.option("--kprime", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--rtol", type=float, default=1e-12, show_default=True)
def oracle(d, delta, p, D, lam, alpha, beta, b, kprime, out, rtol):
    """High-precision independent re-evaluation of every constant; exits 1
    if the fast path disagrees beyond --rtol."""
    params = SpectralParams(d=d, delta=delta, p=p, D=D, lam=lam,
                            alpha=alpha, beta=beta)
    pairs = {
        "B": (C.eval_B(params), O.oracle_B(delta, d)),
        "gamma": (C.eval_gamma(params), O.oracle_gamma(lam, delta, D, d)),
        "gallot_rhs": (C.eval_gallot_rhs(params),
                       O.oracle_gallot_rhs(lam, delta, D, d)),
        "weak_threshold": (C.eval_weak_threshold(params),
                           O.oracle_weak_threshold(delta, D, d)),
        "K": (C.eval_K(params, kprime), O.oracle_K(delta, kprime)),
        "K_lambda": (C.eval_K_lambda(params, kprime),
                     O.oracle_K_lambda(lam, delta, D, d, kprime)),
        "I": (C.eval_I(alpha, delta, p), O.oracle_I(alpha, delta, p)),
        "J": (C.eval_J(beta, delta, p), O.oracle_J(beta, delta, p)),
        "c_pd": (C.eval_c_pd(p, d), O.oracle_c_pd(p, d)),
        "C_voigt": (C.eval_voigt(b, beta)[0], O.oracle_voigt(b, beta)[0]),
        "omega_voigt": (C.eval_voigt(b, beta)[1], O.oracle_voigt(b, beta)[1]),
        "betti_bound": (C.eval_betti_bound(b, beta, params, kprime),
                        O.oracle_betti_bound(b, beta, delta, D, d, kprime)),
        "ultra_constant": (C.eval_ultra_constant(b, beta, params, kprime),
                           O.oracle_ultra_constant(b, beta, delta, D, d, 1.0,
                                                   kprime)),
    }
    lhs_id, rhs_id = O.oracle_gamma_identity(delta, D, d)
    pairs["gamma_identity"] = (lhs_id, rhs_id)

    failed = False
    report = {}
    for name in sorted(pairs):
        fast, slow = pairs[name]
        rel = abs(fast - slow) / max(abs(slow), 1e-300)
        ok = rel < rtol
        failed = failed or not ok
        report[name] = {"value": float(f"{fast:.17g}"),
                        "oracle": float(f"{slow:.17g}"),
                        "rel_err": float(f"{rel:.3g}"), "ok": ok}
        click.echo(f"{name:>16s}  {fast:.15g}  rel_err={rel:.2e}  "
                   f"{'ok' if ok else 'MISMATCH'}")
    if out is not None:
        path = Path(out) / "oracle.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
        click.echo(f"wrote {path}", err=True)
    sys.exit(EXIT_FAILED if failed else EXIT_OK)


if __name__ == "__main__":
    main()
