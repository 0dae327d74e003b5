"""Discrete Laplacian spectral calculus against closed-form Fourier oracles."""

import warnings

import numpy as np
import pytest

from katobounds.geometry import GridSpec, volume
from katobounds.params import DomainError
from katobounds.spectral import (
    TruncationWarning,
    assemble_laplacian,
    continuum_theta_sup,
    eigendecompose,
    flat_symbols,
    min_eig,
    schrodinger_op,
    theta_heat_sup_flat,
    theta_trace_flat,
)


class TestAssembly:
    def test_rows_sum_to_zero(self, conf_lap8):
        r = np.abs(conf_lap8.matrix @ np.ones(conf_lap8.N)).max()
        assert r < 1e-11

    def test_weighted_symmetry(self, conf_lap8):
        import scipy.sparse as sp
        WL = sp.diags(conf_lap8.weights) @ conf_lap8.matrix
        assert abs(WL - WL.T).max() < 1e-13

    def test_nonnegative_spectrum(self, conf_dec8):
        assert conf_dec8.eigenvalues[0] > -1e-10
        assert conf_dec8.eigenvalues[0] == pytest.approx(0.0, abs=1e-10)

    def test_schrodinger_shift_identity(self, flat_lap8, flat_dec8):
        """Adding a constant c shifts every eigenvalue by exactly c."""
        c = 0.7
        dec = eigendecompose(schrodinger_op(flat_lap8, np.full(flat_lap8.N, c)))
        assert np.abs(dec.eigenvalues - (flat_dec8.eigenvalues + c)).max() < 1e-10

    def test_potential_shape_checked(self, flat_lap8):
        with pytest.raises(DomainError):
            schrodinger_op(flat_lap8, np.zeros(7))


class TestFourierOracle:
    def test_flat_eigenvalues_match_symbols(self, flat_dec8, grid8):
        sym = flat_symbols(grid8)
        assert np.abs(flat_dec8.eigenvalues - sym).max() < 1e-10

    def test_theta_sup_matches_kernel(self, flat_dec8, grid8):
        for t in (0.05, 0.1, 0.5, 1.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                sup = flat_dec8.heat_kernel_sup(t)
            assert sup == pytest.approx(theta_heat_sup_flat(grid8, t), rel=1e-12)

    def test_theta_trace_matches(self, flat_dec8, grid8):
        for t in (0.1, 0.5):
            assert flat_dec8.trace_heat(t) == pytest.approx(
                theta_trace_flat(grid8, t), rel=1e-12)

    def test_continuum_theta_is_mesh_limit(self):
        """The discrete theta product approaches the continuum one as the
        mesh refines (the two differ at any fixed mesh)."""
        t = 0.25
        cont = continuum_theta_sup((1.0, 1.0, 1.0), t)
        errs = []
        for n in (8, 16, 32):
            grid = GridSpec(n=(n, n, n), L=(1.0, 1.0, 1.0))
            errs.append(abs(theta_heat_sup_flat(grid, t) - cont))
        assert errs[2] < errs[1] < errs[0]


class TestSemigroup:
    def test_semigroup_property(self, conf_dec8, rng):
        f = rng.standard_normal(conf_dec8.weights.size)
        a = conf_dec8.heat_apply(0.3, conf_dec8.heat_apply(0.2, f))
        b = conf_dec8.heat_apply(0.5, f)
        assert np.abs(a - b).max() < 1e-10

    def test_contraction_and_max_principle(self, conf_dec8, rng):
        f = rng.standard_normal(conf_dec8.weights.size)
        g = conf_dec8.heat_apply(0.4, f)
        assert g.max() <= f.max() + 1e-10
        assert g.min() >= f.min() - 1e-10

    def test_positivity_preservation(self, conf_dec8, rng):
        f = np.abs(rng.standard_normal(conf_dec8.weights.size))
        assert conf_dec8.heat_apply(0.2, f).min() > -1e-12

    def test_constants_are_fixed(self, conf_dec8):
        f = np.ones(conf_dec8.weights.size)
        assert np.abs(conf_dec8.heat_apply(0.7, f) - 1.0).max() < 1e-10

    def test_resolvent_identity(self, conf_dec8, rng):
        """(a - b)(L + a)^-1 (L + b)^-1 = (L + b)^-1 - (L + a)^-1."""
        f = rng.standard_normal(conf_dec8.weights.size)
        a, b = 2.0, 0.5
        lhs = (a - b) * conf_dec8.resolvent_apply(
            a, conf_dec8.resolvent_apply(b, f))
        rhs = conf_dec8.resolvent_apply(b, f) - conf_dec8.resolvent_apply(a, f)
        assert np.abs(lhs - rhs).max() < 1e-10

    def test_resolvent_rejects_bad_shift(self, conf_dec8, rng):
        with pytest.raises(DomainError):
            conf_dec8.resolvent_apply(-1e-6, np.ones(conf_dec8.weights.size))

    def test_resolvent_is_laplace_transform(self, conf_dec8, rng):
        """(L + a)^-1 f = int_0^inf e^(-a t) e^(-t L) f dt (spectral check
        through a dense time quadrature)."""
        f = rng.standard_normal(conf_dec8.weights.size)
        a = 1.5
        t = np.concatenate([np.linspace(0.0, 0.1, 80001),
                            np.linspace(0.1, 60.0, 30001)[1:]])
        lam = conf_dec8.eigenvalues
        coef = conf_dec8.coeffs(f)
        quad = np.trapezoid(
            np.exp(-np.outer(t, lam + a)), t, axis=0)
        lhs = conf_dec8.synth(coef * quad)
        rhs = conf_dec8.resolvent_apply(a, f)
        assert np.abs(lhs - rhs).max() < 1e-6


class TestKernel:
    def test_kernel_symmetric_psd(self, conf_dec8):
        k = conf_dec8.heat_kernel_matrix(0.3)
        assert np.abs(k - k.T).max() < 1e-10
        w = conf_dec8.weights
        evs = np.linalg.eigvalsh(np.sqrt(w)[:, None] * k * np.sqrt(w)[None, :])
        assert evs.min() > -1e-10

    def test_sup_on_diagonal(self, conf_dec8):
        """PSD kernel: the sup over all pairs sits on the diagonal."""
        assert conf_dec8.heat_kernel_sup(0.3, full=True) == pytest.approx(
            conf_dec8.heat_kernel_sup(0.3), rel=1e-12)

    def test_kernel_integrates_to_one(self, conf_dec8):
        k = conf_dec8.heat_kernel_matrix(0.4)
        mass = k @ conf_dec8.weights
        assert np.abs(mass - 1.0).max() < 1e-10

    def test_trace_two_routes(self, conf_dec8):
        t = 0.3
        k = conf_dec8.heat_kernel_matrix(t)
        tr_kernel = float(np.sum(np.diag(k) * conf_dec8.weights))
        assert conf_dec8.trace_heat(t) == pytest.approx(tr_kernel, rel=1e-10)

    def test_trace_below_vol_times_sup(self, conf_dec8, conf_metric, grid8):
        t = 0.3
        vol = volume(conf_metric, grid8)
        assert conf_dec8.trace_heat(t) <= vol * conf_dec8.heat_kernel_sup(t) * (
            1 + 1e-12)

    def test_truncation_warning_below_floor(self, flat_dec8):
        with pytest.warns(TruncationWarning):
            flat_dec8.heat_kernel_sup(1e-4)

    def test_t_min_is_trust_boundary(self, flat_dec8):
        t_floor = flat_dec8.t_min()
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            flat_dec8.heat_kernel_sup(t_floor * 1.05)


class TestEigendecompose:
    def test_extremal_matches_dense_low_end(self, conf_lap8):
        dense = eigendecompose(conf_lap8)
        part = eigendecompose(conf_lap8, count=10)
        assert np.abs(part.eigenvalues - dense.eigenvalues[:10]).max() < 1e-8
        assert not part.full

    def test_partial_refuses_kernel_ops(self, conf_lap8):
        part = eigendecompose(conf_lap8, count=5)
        with pytest.raises(DomainError):
            part.heat_kernel_sup(0.5)

    def test_min_eig_routes_agree(self, conf_lap8):
        dense = eigendecompose(conf_lap8)
        assert min_eig(conf_lap8) == pytest.approx(
            float(dense.eigenvalues[0]), abs=1e-9)

    def test_orthonormal_in_weighted_product(self, conf_dec8):
        G = conf_dec8.vectors.T @ (conf_dec8.weights[:, None] * conf_dec8.vectors)
        assert np.abs(G - np.eye(G.shape[0])).max() < 1e-9
