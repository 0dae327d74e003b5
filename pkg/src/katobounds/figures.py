"""Figure rendering for the report writers (PNG alongside the CSV tables)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_VERDICT_COLORS = {
    "VERIFIED": "#2b8a3e",
    "VIOLATED": "#c92a2a",
    "SKIPPED": "#868e96",
}


def render_bounds_figure(checks: list[dict], path: Path) -> Path:
    """Horizontal bar chart of inequality margins, one bar per check."""
    names, margins, colors = [], [], []
    for i, chk in enumerate(checks):
        names.append(f"{i:02d} {chk['name']}")
        margins.append(chk["margin"] if chk["margin"] is not None else 0.0)
        colors.append(_VERDICT_COLORS.get(chk["verdict"], "#868e96"))
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.35 * len(names))))
    y = range(len(names))
    ax.barh(y, margins, color=colors)
    ax.set_yticks(list(y))
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xscale("symlog", linthresh=1e-12)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("margin (rhs - lhs); gray = skipped")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_sweep_figure(rows: list[dict], parameter: str, path: Path) -> Path:
    """Sweep curves: Kato constants vs their explicit bounds, and the
    admissibility margin, as functions of the swept parameter."""
    x = [r["value"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for key, style in (("c_kato", "o-"), ("kato_rhs", "o--"),
                       ("b_kato", "s-"), ("bkato_rhs", "s--")):
        ys = [r.get(key) for r in rows]
        if any(v is not None for v in ys):
            ax1.plot(x, ys, style, label=key, ms=3)
    ax1.set_xlabel(parameter)
    ax1.set_yscale("log")
    ax1.legend(fontsize=7)
    ax1.set_title("Kato constants vs explicit bounds")

    ax2.plot(x, [r["weak_rhs"] - r["weak_lhs"] for r in rows], "o-",
             label="admissibility margin", ms=3)
    ax2.axhline(0.0, color="k", lw=0.8)
    mm = [r["min_eig_schrodinger"] for r in rows]
    if any(v is not None for v in mm):
        ax2.plot(x, mm, "s-", label="min-eig(L + rho)", ms=3)
    ax2.set_xlabel(parameter)
    ax2.legend(fontsize=7)
    ax2.set_title("admissibility and positivity")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
