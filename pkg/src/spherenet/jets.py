"""Order-2 Taylor jets along the update curve.

A :class:`Jet2` carries (value, first derivative, second derivative) of a
quantity with respect to the curve parameter t at t = 0. Fields may be
scalars or numpy arrays; arithmetic is elementwise except :func:`jet_matmul`.
Pushing jets through the network gives L̄(0), L̄'(0), L̄''(0) for
L̄(t) = ℒ(γ(t)) in one forward pass, with no Hessian in sight.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .matrix_core import frob_norm


@dataclass(frozen=True)
class Jet2:
    v: object
    d1: object
    d2: object

    def __add__(self, other):
        return jet_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        return Jet2(self.v - other.v, self.d1 - other.d1, self.d2 - other.d2)

    def __mul__(self, other):
        return jet_mul(self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    @classmethod
    def constant(cls, c):
        z = np.zeros_like(c) if isinstance(c, np.ndarray) else 0.0
        return cls(c, z, z)

    @classmethod
    def variable(cls, t0=0.0):
        """The jet of t itself."""
        return cls(t0, 1.0, 0.0)


def _lift(x) -> Jet2:
    return x if isinstance(x, Jet2) else Jet2.constant(x)


def jet_add(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2)


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.v * b.v, a.v * b.d1 + a.d1 * b.v, a.v * b.d2 + 2.0 * a.d1 * b.d1 + a.d2 * b.v)


def jet_relu(a: Jet2) -> Jet2:
    """ReLU on jets; a unit sitting exactly at the kink is treated as inactive."""
    active = np.asarray(a.v) > 0.0
    if active.ndim == 0:
        return a if active else Jet2(0.0, 0.0, 0.0)
    return Jet2(a.v * active, a.d1 * active, a.d2 * active)


def jet_matmul(a: Jet2, b: Jet2) -> Jet2:
    """Matrix product ``a @ b`` with the Leibniz rule applied to each coefficient."""
    return Jet2(
        a.v @ b.v,
        a.v @ b.d1 + a.d1 @ b.v,
        a.v @ b.d2 + 2.0 * (a.d1 @ b.d1) + a.d2 @ b.v,
    )


@dataclass(frozen=True)
class CurveCoefficients:
    """Γ_i(0), Γ_i'(0), Γ_i''(0) for every layer of the curve W cos t + μ V sin t.

    Layers with a zero direction are held fixed (all derivatives zero).
    """

    layers: tuple

    @classmethod
    def from_directions(cls, net, directions) -> "CurveCoefficients":
        if len(directions) != len(net):
            raise DimensionError(f"{len(directions)} directions for {len(net)} layers")
        out = []
        for p, d in zip(net.layers, directions):
            V = np.asarray(getattr(d, "V", d), dtype=np.float64)
            if V.shape != p.shape:
                raise DimensionError(f"direction shape {V.shape} != layer shape {p.shape}")
            if frob_norm(V) == 0.0:
                z = np.zeros_like(p.W)
                out.append(Jet2(p.W, z, z))
            else:
                out.append(Jet2(p.W, p.mu * V, -p.W))
        return cls(tuple(out))


def curve_eval(net, directions, data) -> tuple:
    """Return (L̄(0), L̄'(0), L̄''(0)) of the mean squared loss along the update curve.

    ``directions`` holds one unit tangent direction per layer (a
    :class:`~spherenet.sphere.TangentVector` or a bare matrix); a zero matrix
    freezes that layer. ``data`` exposes ``x`` and ``y`` arrays.
    """
    X = np.asarray(data.x, dtype=np.float64)
    Y = np.asarray(data.y, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.dims[0] or Y.shape != (X.shape[0], net.dims[-1]):
        raise DimensionError("data shape does not match the network")
    n = X.shape[0]
    coeffs = CurveCoefficients.from_directions(net, directions)
    act = net.activation

    # rows are samples, so each layer acts as h ↦ h Γᵀ
    h = Jet2.constant(X)
    last = len(coeffs.layers) - 1
    for i, G in enumerate(coeffs.layers):
        z = jet_matmul(h, Jet2(G.v.T, G.d1.T, G.d2.T))
        h = Jet2(*act.jet(z.v, z.d1, z.d2)) if i < last else z

    e = h - Y
    # ½‖e‖² per sample, then the batch mean
    sq = jet_mul(e, e)
    return (
        float(0.5 * np.sum(sq.v) / n),
        float(0.5 * np.sum(sq.d1) / n),
        float(0.5 * np.sum(sq.d2) / n),
    )
