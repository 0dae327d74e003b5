"""Parameter tuples shared by every explicit formula in the constant layer."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class DomainError(ValueError):
    """A standing hypothesis of the estimates is violated (hard error, no NaNs)."""


@dataclass(frozen=True)
class SpectralParams:
    """The parameter tuple (d, delta, p, D, lam, alpha, beta, rho0).

    d       integer manifold dimension, d >= 3
    delta   effective dimension, delta > d
    p       integrability exponent (delta < 2p wherever both enter a formula)
    D       diameter upper bound, > 0
    lam     curvature level lambda, > 0
    alpha   resolvent shift, > 0
    beta    time horizon, > 0
    rho0    curvature floor, > 0
    """

    d: int = 3
    delta: float = 4.0
    p: float = 4.0
    D: float = 1.0
    lam: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    rho0: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3:
            raise DomainError(f"d must be an integer >= 3, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not self.delta > self.d:
            raise DomainError(f"delta must exceed d ({self.d}), got {self.delta}")
        for name in ("p", "D", "lam", "alpha", "beta", "rho0"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"{name} must be positive, got {v}")

    def require_p(self):
        """Check delta < 2p, needed by every L^p-based bound."""
        if not self.delta < 2 * self.p:
            raise DomainError(
                f"requires delta < 2p, got delta={self.delta}, p={self.p}"
            )

    def with_(self, **kw) -> "SpectralParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class ConstantBundle:
    """All explicit constants evaluated at one parameter tuple."""

    B: float
    gamma: float
    Kprime: float
    K_delta: float
    K_lambda: float
    I_val: float
    J_val: float
    c_pd: float
    C_voigt: float
    omega_voigt: float
    kappa0: float
    k_conj: int
    c_ultra: float
    cbar: float
    weak_threshold: float
    gallot_rhs: float
    er_threshold: float
    betti_bound: float
    params: SpectralParams = field(repr=False, default=None)
