"""Explicit Kato-type bounds under integral curvature assumptions, with
numerical cross-validation on discretized torus geometries.

Layout:

- ``params``, ``constants``, ``oracle``: closed-form constants, thresholds
  and their high-precision independent re-evaluations.
- ``geometry``: periodic grids, diagonal metric families, Ricci curvature,
  volume and diameter estimates.
- ``spectral``: flux-form Laplacian, weighted spectral calculus, heat
  semigroup, flat-torus Fourier oracles.
- ``kato``: Kato constants of potentials and every function-level check.
- ``hodge``: Bochner/Hodge operators on 1-forms, harmonic dimension,
  domination and Betti-bound checks.
- ``config``, ``runner``, ``figures``, ``cli``: scenario plumbing.
"""

from .params import ConstantBundle, DomainError, SpectralParams

__version__ = "1.0.0"

__all__ = ["ConstantBundle", "DomainError", "SpectralParams", "__version__"]
