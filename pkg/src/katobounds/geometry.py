"""Analytic periodic metric families on flat d-tori and their pointwise geometry.

All supported families are diagonal in coordinates, which keeps the flux-form
Laplacian and the 1-form machinery assembled from plain diagonal weights.
Scalar fields are represented as flat numpy arrays in C order over the grid
nodes of a :class:`GridSpec`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .params import DomainError

__all__ = [
    "GridSpec",
    "MetricField",
    "FlatMetric",
    "ConformalMetric",
    "DiagonalMetric",
    "make_metric",
    "PointGeometry",
    "christoffel",
    "ricci",
    "pointwise_geometry",
    "rho_field",
    "conformal_ricci_exact",
    "conformal_rho_exact",
    "volume_weights",
    "volume",
    "lp_mean",
    "diameter_upper",
]


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid on [0, L_1) x ... x [0, L_d) with n_i nodes per axis."""

    n: tuple[int, ...]
    L: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        if len(self.n) != len(self.L):
            raise DomainError("n and L must have the same length")
        if self.d < 3:
            raise DomainError(f"dimension must be >= 3, got {self.d}")
        if any(v < 8 for v in self.n):
            raise DomainError(f"need at least 8 nodes per axis, got {self.n}")
        if any(v <= 0 for v in self.L):
            raise DomainError(f"periods must be positive, got {self.L}")

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def N(self) -> int:
        return int(np.prod(self.n))

    @property
    def h(self) -> np.ndarray:
        """Per-axis spacing L_i / n_i."""
        return np.asarray(self.L) / np.asarray(self.n)

    @property
    def cell(self) -> float:
        """Volume of one coordinate cell, prod h_i."""
        return float(np.prod(self.h))

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape (N, d), C order over the index grid."""
        axes = [np.arange(m) * (l / m) for m, l in zip(self.n, self.L)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def index_grid(self) -> np.ndarray:
        return np.arange(self.N).reshape(self.n)


class MetricField:
    """Base class: diagonal Riemannian metric g_ii(x) with analytic derivatives."""

    family_id = "base"

    def diag(self, x: np.ndarray) -> np.ndarray:
        """Metric diagonal g_ii at points x, shape (..., d)."""
        raise NotImplementedError

    def ddiag(self, x: np.ndarray) -> np.ndarray:
        """Analytic derivatives: ddiag[..., k, i] = d_k g_ii, shape (..., d, d)."""
        raise NotImplementedError

    def sqrt_det(self, x: np.ndarray) -> np.ndarray:
        g = self.diag(x)
        if np.any(g <= 0):
            raise DomainError(f"{self.family_id}: metric not positive definite")
        return np.sqrt(np.prod(g, axis=-1))

    def describe(self) -> dict:
        return {"family": self.family_id}


class FlatMetric(MetricField):
    family_id = "flat"

    def diag(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape)

    def ddiag(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (x.shape[-1], x.shape[-1]))


class ConformalMetric(MetricField):
    """g = e^(2 phi) * identity, with a periodic analytic conformal factor phi.

    profile="bump": phi = eps * prod_i exp(kappa_i (cos(2 pi (x_i - c_i)/L_i) - 1)),
    a periodic Gaussian-like well of width sigma (kappa_i = (L_i/(2 pi sigma))^2).
    Negative eps carves a well of negative curvature; positive eps a cap.

    profile="cosine": phi = eps * sum_i cos(2 pi (x_i - c_i)/L_i), a plain
    trigonometric polynomial.
    """

    family_id = "conformal"

    def __init__(self, L, eps: float, sigma: float = 0.25, center=None,
                 profile: str = "bump"):
        self.L = np.asarray(L, dtype=float)
        d = self.L.size
        self.eps = float(eps)
        self.sigma = float(sigma)
        if profile not in ("bump", "cosine"):
            raise DomainError(f"unknown conformal profile {profile!r}")
        self.profile = profile
        self.center = (np.asarray(center, dtype=float) if center is not None
                       else self.L / 2.0)
        if self.center.size != d:
            raise DomainError("center must have one entry per axis")
        if profile == "bump" and not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {sigma}")
        self._omega = 2.0 * np.pi / self.L
        self._kappa = (self.L / (2.0 * np.pi * self.sigma)) ** 2

    def _theta(self, x):
        return (np.asarray(x, dtype=float) - self.center) * self._omega

    def phi(self, x) -> np.ndarray:
        th = self._theta(x)
        if self.profile == "cosine":
            return self.eps * np.cos(th).sum(axis=-1)
        return self.eps * np.exp((self._kappa * (np.cos(th) - 1.0)).sum(axis=-1))

    def grad_phi(self, x) -> np.ndarray:
        th = self._theta(x)
        if self.profile == "cosine":
            return -self.eps * np.sin(th) * self._omega
        bump = np.exp((self._kappa * (np.cos(th) - 1.0)).sum(axis=-1))
        return self.eps * bump[..., None] * (-self._kappa * np.sin(th) * self._omega)

    def hess_phi(self, x) -> np.ndarray:
        th = self._theta(x)
        d = th.shape[-1]
        if self.profile == "cosine":
            diag = -self.eps * np.cos(th) * self._omega ** 2
            out = np.zeros(th.shape[:-1] + (d, d))
            idx = np.arange(d)
            out[..., idx, idx] = diag
            return out
        bump = np.exp((self._kappa * (np.cos(th) - 1.0)).sum(axis=-1))
        u = -self._kappa * np.sin(th) * self._omega  # d(log bump)/dx_i
        du = -self._kappa * np.cos(th) * self._omega ** 2
        out = u[..., :, None] * u[..., None, :]
        idx = np.arange(d)
        out[..., idx, idx] += du
        return self.eps * bump[..., None, None] * out

    def diag(self, x):
        e2 = np.exp(2.0 * self.phi(x))
        return np.repeat(e2[..., None], self.L.size, axis=-1)

    def ddiag(self, x):
        e2 = np.exp(2.0 * self.phi(x))
        gp = self.grad_phi(x)
        d = self.L.size
        out = np.zeros(np.shape(e2) + (d, d))
        out[...] = (2.0 * e2[..., None] * gp)[..., :, None]
        return out

    def describe(self):
        return {
            "family": self.family_id,
            "profile": self.profile,
            "eps": self.eps,
            "sigma": self.sigma,
            "center": self.center.tolist(),
        }


class DiagonalMetric(MetricField):
    """g_ii = exp(2 eps_i cos(2 pi x_j / L_j)) with j = (i+1) mod d."""

    family_id = "diagonal"

    def __init__(self, L, eps):
        self.L = np.asarray(L, dtype=float)
        d = self.L.size
        eps = np.asarray(eps, dtype=float)
        if eps.ndim == 0:
            eps = np.full(d, float(eps))
        if eps.size != d:
            raise DomainError("eps must be scalar or one entry per axis")
        self.eps = eps
        self._omega = 2.0 * np.pi / self.L
        self._partner = (np.arange(d) + 1) % d

    def _psi(self, x):
        x = np.asarray(x, dtype=float)
        th = x[..., self._partner] * self._omega[self._partner]
        return self.eps * np.cos(th)

    def diag(self, x):
        return np.exp(2.0 * self._psi(x))

    def ddiag(self, x):
        x = np.asarray(x, dtype=float)
        d = self.L.size
        g = self.diag(x)
        th = x[..., self._partner] * self._omega[self._partner]
        dpsi = -self.eps * np.sin(th) * self._omega[self._partner]
        out = np.zeros(x.shape[:-1] + (d, d))
        for i in range(d):
            out[..., self._partner[i], i] = 2.0 * g[..., i] * dpsi[..., i]
        return out

    def describe(self):
        return {"family": self.family_id, "eps": self.eps.tolist()}


def make_metric(family: str, L, **params) -> MetricField:
    family = family.lower()
    if family == "flat":
        return FlatMetric()
    if family == "conformal":
        return ConformalMetric(L, **params)
    if family == "diagonal":
        return DiagonalMetric(L, **params)
    raise DomainError(f"unknown metric family {family!r}")


# ---------------------------------------------------------------------------
# pointwise curvature
# ---------------------------------------------------------------------------

@dataclass
class PointGeometry:
    """All pointwise Riemannian quantities at one node."""

    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: float
    Gamma: np.ndarray       # Gamma[i, j, k] = Gamma^i_{jk}
    Ric: np.ndarray
    rho: float


def christoffel(metric: MetricField, x: np.ndarray) -> np.ndarray:
    """Batched Christoffel symbols, shape (..., d, d, d) with Gamma[..., i, j, k]."""
    g = metric.diag(x)
    dg = metric.ddiag(x)  # [..., k, i] = d_k g_ii
    d = g.shape[-1]
    ginv = 1.0 / g
    # dG[..., k, i, j] = d_k g_ij for the diagonal metric
    dG = np.zeros(g.shape[:-1] + (d, d, d))
    for i in range(d):
        dG[..., :, i, i] = dg[..., :, i]
    # Gamma^i_{jk} = 1/2 g^{ii} (d_j g_ik + d_k g_ij - d_i g_jk)
    term = (np.swapaxes(dG, -3, -2)    # [..., i, j, k] <- d_j g_ik
            + np.moveaxis(dG, -3, -1)  # [..., i, j, k] <- d_k g_ij
            - dG)                      # [..., i, j, k] <- d_i g_jk
    return 0.5 * ginv[..., :, None, None] * term


def ricci(metric: MetricField, x: np.ndarray, h: float) -> np.ndarray:
    """Ricci tensor by O(h^2) central differences of the Christoffel symbols."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    gamma = christoffel(metric, x)
    dgamma = np.empty(x.shape[:-1] + (d, d, d, d))  # [..., m, i, j, k] = d_m Gamma^i_{jk}
    for m in range(d):
        e = np.zeros(d)
        e[m] = h
        dgamma[..., m, :, :, :] = (
            christoffel(metric, x + e) - christoffel(metric, x - e)
        ) / (2.0 * h)
    # R_jk = d_i Gamma^i_jk - d_k Gamma^i_ji + Gamma^i_ip Gamma^p_jk - Gamma^i_kp Gamma^p_ji
    t1 = np.einsum("...iijk->...jk", dgamma)
    t2 = np.einsum("...kiji->...jk", dgamma)
    t3 = np.einsum("...iip,...pjk->...jk", gamma, gamma)
    t4 = np.einsum("...ikp,...pji->...jk", gamma, gamma)
    ric = t1 - t2 + t3 - t4
    return 0.5 * (ric + np.swapaxes(ric, -1, -2))


def _rho_from_ric(ric: np.ndarray, gdiag: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of the generalized problem Ric v = rho g v (g diagonal)."""
    s = 1.0 / np.sqrt(gdiag)
    sym = ric * s[..., :, None] * s[..., None, :]
    return np.linalg.eigvalsh(sym)[..., 0]


def pointwise_geometry(metric: MetricField, grid: GridSpec, x: np.ndarray,
                       h: float | None = None) -> PointGeometry:
    """All pointwise quantities at one coordinate point."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = float(grid.h.min())
    if h > grid.h.min() * (1 + 1e-12):
        raise DomainError("finite-difference step must not exceed the grid spacing")
    g = metric.diag(x)
    if np.any(g <= 0):
        raise DomainError("metric not positive definite at the requested point")
    ric = ricci(metric, x, h)
    return PointGeometry(
        g=np.diag(g),
        g_inv=np.diag(1.0 / g),
        sqrt_det_g=float(np.sqrt(np.prod(g))),
        Gamma=christoffel(metric, x),
        Ric=ric,
        rho=float(_rho_from_ric(ric, g)),
    )


def rho_field(metric: MetricField, grid: GridSpec, h: float | None = None) -> np.ndarray:
    """Lowest Ricci eigenvalue at every grid node, shape (N,), C node order."""
    if h is None:
        h = float(grid.h.min())
    x = grid.nodes()
    g = metric.diag(x)
    if np.any(g <= 0):
        raise DomainError("metric not positive definite on the grid")
    ric = ricci(metric, x, h)
    return _rho_from_ric(ric, g)


def conformal_ricci_exact(metric: ConformalMetric, x: np.ndarray) -> np.ndarray:
    """Closed-form Ricci of g = e^(2 phi) delta (independent of the FD path).

    Ric = -(d-2)(Hess phi - dphi (x) dphi)
          + (-Lap phi - (d-2)|grad phi|^2) delta,
    with Euclidean gradient, Hessian and Laplacian on the right-hand side.
    """
    d = metric.L.size
    gp = metric.grad_phi(x)
    H = metric.hess_phi(x)
    lap = np.einsum("...ii->...", H)
    norm2 = (gp ** 2).sum(axis=-1)
    ric = -(d - 2.0) * (H - gp[..., :, None] * gp[..., None, :])
    scalar = -lap - (d - 2.0) * norm2
    idx = np.arange(d)
    ric[..., idx, idx] += scalar[..., None]
    return ric


def conformal_rho_exact(metric: ConformalMetric, x: np.ndarray) -> np.ndarray:
    """Closed-form lowest Ricci eigenvalue: e^(-2 phi) * lambda_min(Ric_exact)."""
    ric = conformal_ricci_exact(metric, x)
    return np.exp(-2.0 * metric.phi(x)) * np.linalg.eigvalsh(ric)[..., 0]


# ---------------------------------------------------------------------------
# integration and distances
# ---------------------------------------------------------------------------

def volume_weights(metric: MetricField, grid: GridSpec) -> np.ndarray:
    """Node quadrature weights w_x = sqrt(det g)(x) * prod h_i, shape (N,)."""
    return metric.sqrt_det(grid.nodes()) * grid.cell


def volume(metric: MetricField, grid: GridSpec) -> float:
    """Riemannian volume, second-order accurate for smooth metrics."""
    return float(volume_weights(metric, grid).sum())


def lp_mean(f: np.ndarray, p: float, metric: MetricField, grid: GridSpec) -> float:
    """Volume-normalized L^p mean (Vol^-1 * integral |f|^p dvol)^(1/p)."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    w = volume_weights(metric, grid)
    return float((np.sum(w * np.abs(np.asarray(f, dtype=float)) ** p) / w.sum())
                 ** (1.0 / p))


def _edge_offsets(d: int, include_diagonals: bool) -> list[np.ndarray]:
    offsets = [np.eye(d, dtype=int)[i] for i in range(d)]
    if include_diagonals:
        for i in range(d):
            for j in range(i + 1, d):
                for sj in (1, -1):
                    o = np.zeros(d, dtype=int)
                    o[i], o[j] = 1, sj
                    offsets.append(o)
    return offsets


def grid_graph(metric: MetricField, grid: GridSpec,
               include_diagonals: bool = True) -> sp.csr_matrix:
    """Weighted edge graph: axis (and face-diagonal) neighbors, edge weight
    1/2 (sqrt(g_x(e,e)) + sqrt(g_y(e,e))) for edge vector e."""
    idx = grid.index_grid()
    x = grid.nodes()
    g = metric.diag(x)
    h = grid.h
    rows, cols, vals = [], [], []
    for o in _edge_offsets(grid.d, include_diagonals):
        nb = np.roll(idx, shift=tuple(-o), axis=tuple(range(grid.d))).ravel()
        v = o * h
        lx = np.sqrt((g * v ** 2).sum(axis=-1))
        ly = lx[nb]
        rows.append(np.arange(grid.N))
        cols.append(nb)
        vals.append(0.5 * (lx + ly))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.N, grid.N),
    )


def diameter_upper(metric: MetricField, grid: GridSpec,
                   include_diagonals: bool = True) -> float:
    """Discrete upper estimate of the geodesic diameter.

    Max over sources of the shortest-path distance on the weighted grid
    graph; overestimates the continuum diameter by a mesh-anisotropy factor.
    """
    graph = grid_graph(metric, grid, include_diagonals)
    dist = _csgraph_dijkstra(graph, directed=False)
    return float(dist.max())


def dijkstra_single(graph: sp.csr_matrix, source: int) -> np.ndarray:
    """Plain heapq Dijkstra; independent oracle for the csgraph path."""
    n = graph.shape[0]
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    seen = np.zeros(n, dtype=bool)
    heap = [(0.0, source)]
    indptr, indices, data = graph.indptr, graph.indices, graph.data
    while heap:
        du, u = heapq.heappop(heap)
        if seen[u]:
            continue
        seen[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            alt = du + data[k]
            if alt < dist[v]:
                dist[v] = alt
                heapq.heappush(heap, (alt, v))
    return dist
