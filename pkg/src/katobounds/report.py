"""Report records shared by the function-level and 1-form-level check suites."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

# relative slack on every inequality verdict; margins are always reported
VERDICT_RTOL = 1e-6


class Verdict(str, enum.Enum):
    VERIFIED = "VERIFIED"
    VIOLATED = "VIOLATED"
    SKIPPED = "SKIPPED"


def inequality_verdict(lhs: float, rhs: float, rtol: float = VERDICT_RTOL) -> Verdict:
    if lhs <= rhs + rtol * abs(rhs):
        return Verdict.VERIFIED
    return Verdict.VIOLATED


@dataclass
class AdmissibilityReport:
    """One admissibility-class membership test (curvature smallness vs threshold)."""

    which: str                  # "weak" or "gallot"
    delta: float
    D_used: float
    d: int
    lam: float | None
    lhs: float
    rhs: float
    admitted: bool

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "delta": self.delta,
            "D_used": self.D_used,
            "d": self.d,
            "lambda": self.lam,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "admitted": self.admitted,
        }


@dataclass
class BoundReport:
    """One inequality instantiated: numeric LHS vs explicit RHS.

    A VIOLATED verdict is data, never an exception.  ``details`` carries the
    per-sample rows (e.g. one per time sample); ``provenance`` the parameters
    and K' that produced the RHS.
    """

    name: str
    hypothesis_ok: bool
    numeric_lhs: float | None
    paper_rhs: float | None
    verdict: Verdict
    margin: float | None = None
    skip_reason: str | None = None
    provenance: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "hypothesis_ok": self.hypothesis_ok,
            "numeric_lhs": self.numeric_lhs,
            "paper_rhs": self.paper_rhs,
            "margin": self.margin,
            "verdict": self.verdict.value,
            "skip_reason": self.skip_reason,
            "provenance": dict(sorted(self.provenance.items())),
            "details": self.details,
        }


def aggregate(name: str, rows: list[dict], hypothesis_ok: bool = True,
              skip_reason: str | None = None, provenance: dict | None = None,
              ) -> BoundReport:
    """Fold per-sample rows (each with lhs/rhs/verdict) into one report.

    VIOLATED if any active row violates; SKIPPED if nothing was checked;
    otherwise VERIFIED.  The reported lhs/rhs/margin come from the row with
    the smallest margin.
    """
    active = [r for r in rows if r["verdict"] != Verdict.SKIPPED.value]
    if not hypothesis_ok or not active:
        return BoundReport(
            name=name, hypothesis_ok=hypothesis_ok, numeric_lhs=None,
            paper_rhs=None, verdict=Verdict.SKIPPED,
            skip_reason=skip_reason or "no sample above the mesh time floor",
            provenance=provenance or {}, details=rows,
        )
    worst = min(active, key=lambda r: r["rhs"] - r["lhs"])
    violated = any(r["verdict"] == Verdict.VIOLATED.value for r in active)
    return BoundReport(
        name=name,
        hypothesis_ok=True,
        numeric_lhs=worst["lhs"],
        paper_rhs=worst["rhs"],
        margin=worst["rhs"] - worst["lhs"],
        verdict=Verdict.VIOLATED if violated else Verdict.VERIFIED,
        provenance=provenance or {},
        details=rows,
    )
