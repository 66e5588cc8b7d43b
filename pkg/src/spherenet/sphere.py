"""Fixed-Frobenius-norm matrix spheres.

A layer's weights live on {W : ‖W‖_F = μ}. The product manifold over layers
is just a list of :class:`SpherePoint`; every operation factors layerwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError
from .matrix_core import as_matrix, frob_inner, frob_norm

NORM_RTOL = 1e-9
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class SpherePoint:
    """A matrix ``W`` with ``frob_norm(W) == mu``.

    Construction validates the norm; use :meth:`from_matrix` to project an
    arbitrary nonzero matrix onto the sphere first.
    """

    W: np.ndarray
    mu: float

    def __post_init__(self):
        W = as_matrix(self.W).copy()
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        mu = float(self.mu)
        if not mu > 0:
            raise ContractError(f"sphere radius must be positive, got {mu}")
        object.__setattr__(self, "mu", mu)
        if abs(frob_norm(W) - mu) > NORM_RTOL * mu:
            raise ContractError(f"‖W‖ = {frob_norm(W)!r} is off the sphere of radius {mu!r}")

    @classmethod
    def from_matrix(cls, W, mu: float) -> "SpherePoint":
        W = as_matrix(W)
        n = frob_norm(W)
        if n == 0.0:
            raise ContractError("cannot project the zero matrix onto a sphere")
        return cls(W * (mu / n), mu)

    @property
    def shape(self) -> tuple:
        return self.W.shape


@dataclass(frozen=True)
class TangentVector:
    """A matrix ``V`` orthogonal to ``base.W`` in the Frobenius inner product."""

    V: np.ndarray
    base: SpherePoint

    def __post_init__(self):
        V = as_matrix(self.V).copy()
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        if V.shape != self.base.shape:
            raise DimensionError(f"tangent shape {V.shape} != base shape {self.base.shape}")
        mu = self.base.mu
        if abs(frob_inner(self.base.W, V)) > NORM_RTOL * mu * frob_norm(V):
            raise ContractError("vector is not tangent at its base point")

    @property
    def norm(self) -> float:
        return frob_norm(self.V)


def project_tangent(X: SpherePoint, H) -> TangentVector:
    """Remove the radial component of ``H`` at ``X``: H − (⟨X,H⟩/μ²)·X."""
    H = as_matrix(H)
    if H.shape != X.shape:
        raise DimensionError(f"shape mismatch: {H.shape} vs {X.shape}")
    V = H - (frob_inner(X.W, H) / X.mu**2) * X.W
    # one refinement pass; the first leaves O(eps·‖H‖) radial residue
    V = V - (frob_inner(X.W, V) / X.mu**2) * X.W
    if abs(frob_inner(X.W, V)) > NORM_RTOL * X.mu * frob_norm(V):
        # what is left is rounding noise of an (almost) radial H
        V = np.zeros_like(V)
    return TangentVector(V, X)


def exp_map(X: SpherePoint, V: TangentVector, t: float) -> SpherePoint:
    """Follow the great circle from ``X`` along unit tangent ``V`` for angle ``t``.

    Returns W cos t + μ V sin t, rescaled to norm exactly μ.
    """
    if V.base.shape != X.shape:
        raise DimensionError("tangent vector does not match the base point shape")
    vn = V.norm
    if abs(vn - 1.0) > UNIT_TOL:
        raise ContractError(f"exp_map needs a unit tangent vector, got norm {vn!r}")
    W = X.W * np.cos(t) + (X.mu * np.sin(t)) * V.V
    return SpherePoint(renormalise(W, X.mu), X.mu)


def renormalise(W: np.ndarray, mu: float) -> np.ndarray:
    """Rescale ``W`` to norm ``mu`` unless it is already there to within a few ulps."""
    n = frob_norm(W)
    if abs(n - mu) <= 4.0 * np.finfo(np.float64).eps * mu:
        return W
    return W * (mu / n)


def geodesic_distance(X: SpherePoint, Y: SpherePoint) -> float:
    """Angle arccos(⟨X,Y⟩/μ²) between two points of the same sphere."""
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {Y.shape}")
    if abs(X.mu - Y.mu) > NORM_RTOL * max(X.mu, Y.mu):
        raise ContractError(f"points lie on different spheres (μ={X.mu}, μ={Y.mu})")
    c = frob_inner(X.W, Y.W) / X.mu**2
    return float(np.arccos(np.clip(c, -1.0, 1.0)))
