"""Independent reference computations used only by the tests.

Nothing here imports the package's numerical code paths; each helper is
a deliberately naive re-derivation.
"""

import math

import numpy as np


def jacobi_singular_values(A, sweeps: int = 100, tol: float = 1e-15) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations, descending."""
    U = np.array(A, dtype=np.float64)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(U[:, p] @ U[:, p])
                beta = float(U[:, q] @ U[:, q])
                gamma = float(U[:, p] @ U[:, q])
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def naive_forward(mats, x, relu=True, dtype=np.float64):
    """f(x) for raw weight matrices, one sample, explicit loops over layers."""
    h = np.asarray(x, dtype=dtype)
    for i, W in enumerate(mats):
        z = np.asarray(W, dtype=dtype) @ h
        if i < len(mats) - 1 and relu:
            z = np.array([v if v > 0 else dtype(0) for v in z], dtype=dtype)
        h = z
    return h


def naive_loss(mats, X, Y, relu=True, dtype=np.float64):
    """Mean of ½‖f(x) − y‖², summed sample by sample."""
    total = dtype(0)
    for x, y in zip(X, Y):
        r = naive_forward(mats, x, relu, dtype) - np.asarray(y, dtype=dtype)
        total += dtype(0.5) * np.sum(r * r)
    return total / dtype(len(X))


def fd_gradient(mats, X, Y, step: float = 1e-5, relu=True) -> list:
    """Central finite differences of the mean loss with respect to every weight entry."""
    mats = [np.array(W, dtype=np.float64) for W in mats]
    grads = []
    for W in mats:
        G = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            old = W[idx]
            W[idx] = old + step
            fp = naive_loss(mats, X, Y, relu)
            W[idx] = old - step
            fm = naive_loss(mats, X, Y, relu)
            W[idx] = old
            G[idx] = (fp - fm) / (2.0 * step)
        grads.append(G)
    return grads


def curve_mats(mats, mus, dirs, t, dtype=np.longdouble):
    """Weights at angle t on each layer's great circle (zero direction = frozen layer)."""
    t = dtype(t)
    out = []
    for W, mu, V in zip(mats, mus, dirs):
        W = np.asarray(W, dtype=dtype)
        V = np.asarray(V, dtype=dtype)
        if not np.any(V):
            out.append(W)
        else:
            out.append(W * np.cos(t) + dtype(mu) * V * np.sin(t))
    return out


def curve_loss(mats, mus, dirs, X, Y, t, relu=True):
    """ℒ(γ(t)) in extended precision."""
    return naive_loss(curve_mats(mats, mus, dirs, t), X, Y, relu, dtype=np.longdouble)


def richardson_curve_derivatives(mats, mus, dirs, X, Y, steps=(1e-4, 1e-5), relu=True) -> tuple:
    """First and second t-derivatives of ℒ(γ(t)) at 0.

    Central differences at two steps h₁ > h₂, combined so the h² error terms
    cancel: D = (h₁²·D(h₂) − h₂²·D(h₁)) / (h₁² − h₂²).
    """
    f0 = curve_loss(mats, mus, dirs, X, Y, 0.0, relu)
    d1, d2 = [], []
    for h in steps:
        fp = curve_loss(mats, mus, dirs, X, Y, h, relu)
        fm = curve_loss(mats, mus, dirs, X, Y, -h, relu)
        hh = np.longdouble(h)
        d1.append((fp - fm) / (2 * hh))
        d2.append((fp - 2 * f0 + fm) / (hh * hh))
    h1, h2 = (np.longdouble(s) ** 2 for s in steps)

    def combine(d):
        return float((h1 * d[1] - h2 * d[0]) / (h1 - h2))

    return combine(d1), combine(d2)


def random_unit_tangent(rng, W):
    """Uniformly oriented unit matrix orthogonal to W."""
    H = rng.normal(size=W.shape)
    H = H - (np.sum(W * H) / np.sum(W * W)) * W
    return H / np.linalg.norm(H)


def random_sphere_matrix(rng, shape, mu=1.0):
    W = rng.normal(size=shape)
    return W * (mu / np.linalg.norm(W))


def min_abs_preactivation(net, X, dirs, hs=(0.0, 2e-4, -2e-4)):
    """Smallest |pre-activation| seen along the curve near t = 0 (hidden layers only)."""
    m = np.inf
    for t in hs:
        mats = [np.asarray(W, dtype=float) for W in curve_mats(net.weights, net.mus, dirs, t, dtype=np.float64)]
        for x in X:
            h = x
            for W in mats[:-1]:
                z = W @ h
                m = min(m, np.min(np.abs(z)))
                h = np.maximum(z, 0)
    return m
