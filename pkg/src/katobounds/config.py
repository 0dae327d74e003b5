"""Run configuration: YAML schema, validation, defaults."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .params import DomainError


class ConfigError(ValueError):
    """Invalid run configuration; message names the first failing constraint."""


DEFAULT_ANALYSIS = {
    "delta": 4.0,
    "p": 4.0,
    "alpha": [0.5, 1.0, 2.0, 4.0, 8.0],
    "beta": [0.25, 0.5, 1.0, 2.0],
    "t_samples": [0.05, 0.1, 0.25, 0.5, 1.0],
    "rho0": 1.0,
    "kprime": 1.0,
    "lambda_scan": [1e-2, 1e3, 200],
    "gap_tol": None,
    "quad_nodes": 32,
    "seed": 0,
    "hodge": True,
}


@dataclass
class RunConfig:
    family: str
    metric_params: dict
    n: tuple[int, ...]
    L: tuple[float, ...]
    analysis: dict
    sweep: dict | None
    out_dir: Path
    figures: bool = True
    workers: int = 1

    @property
    def d(self) -> int:
        return len(self.n)


def _require(cond: bool, constraint: str):
    if not cond:
        raise ConfigError(f"invalid config: {constraint}")


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return parse_config(raw or {})


def parse_config(raw: dict) -> RunConfig:
    man = raw.get("manifold") or {}
    family = str(man.get("family", "flat")).lower()
    _require(family in ("flat", "conformal", "diagonal"),
             f"manifold.family must be flat/conformal/diagonal, got {family!r}")
    n = tuple(int(v) for v in man.get("n", [12, 12, 12]))
    L = tuple(float(v) for v in man.get("L", [1.0] * len(n)))
    _require(len(n) == len(L), "manifold.n and manifold.L lengths differ")
    _require(len(n) >= 3, "manifold dimension must be >= 3")
    _require(all(v >= 8 for v in n), "manifold.n entries must be >= 8")
    _require(all(v > 0 for v in L), "manifold.L entries must be positive")

    ana = dict(DEFAULT_ANALYSIS)
    ana.update(raw.get("analysis") or {})
    d = len(n)
    _require(ana["delta"] > d, f"analysis.delta must exceed d={d}")
    _require(ana["delta"] < 2 * ana["p"], "analysis requires delta < 2p")
    _require(ana["rho0"] > 0, "analysis.rho0 must be positive")
    _require(ana["kprime"] > 0, "analysis.kprime must be positive")
    for key in ("alpha", "beta", "t_samples"):
        vals = list(ana[key])
        _require(len(vals) > 0 and all(v > 0 for v in vals),
                 f"analysis.{key} must be a nonempty list of positives")
        ana[key] = [float(v) for v in vals]
    _require(all(t <= 1.0 for t in ana["t_samples"]),
             "analysis.t_samples must lie in (0, 1]")
    scan = list(ana["lambda_scan"])
    _require(len(scan) == 3 and scan[0] > 0 and scan[1] > scan[0]
             and int(scan[2]) >= 2,
             "analysis.lambda_scan must be [lo, hi, count] with 0 < lo < hi")
    ana["lambda_scan"] = [float(scan[0]), float(scan[1]), int(scan[2])]

    sweep = raw.get("sweep")
    if sweep is not None:
        _require("parameter" in sweep, "sweep.parameter missing")
        sweep = {"parameter": str(sweep["parameter"]),
                 "values": [float(v) for v in sweep.get("values", [])]}

    out = raw.get("output") or {}
    return RunConfig(
        family=family,
        metric_params={k: v for k, v in (man.get("params") or {}).items()},
        n=n,
        L=L,
        analysis=ana,
        sweep=sweep,
        out_dir=Path(out.get("directory", "out")),
        figures=bool(out.get("figures", True)),
        workers=int(raw.get("workers", 1)),
    )


def config_echo(cfg: RunConfig) -> dict:
    return {
        "manifold": {
            "family": cfg.family,
            "params": dict(sorted(cfg.metric_params.items())),
            "n": list(cfg.n),
            "L": list(cfg.L),
        },
        "analysis": dict(sorted(cfg.analysis.items())),
        "sweep": cfg.sweep,
    }
