"""Dense matrix primitives.

Matrices are plain 2-D ``float64`` numpy arrays. The helpers here add the
shape checks and the deterministic power iteration used for operator norms.
"""

import warnings

import numpy as np

from .errors import ConvergenceWarning, DimensionError

OP_NORM_TOL = 1e-10
OP_NORM_MAX_ITERS = 500


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array (copying only if needed)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def frob_inner(a, b) -> float:
    """Frobenius inner product trace(AᵀB)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def frob_norm(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.dot(a.ravel(), a.ravel())))


def op_norm(a, tol: float = OP_NORM_TOL, max_iters: int = OP_NORM_MAX_ITERS) -> float:
    """Largest singular value of ``a`` by power iteration on the smaller Gram matrix.

    Each iteration squares the (trace-normalised) Gram power, so iteration k
    applies G^(2^k) to the start vector; the eigenvalue estimate is the
    Rayleigh quotient of that vector against G itself. This keeps power
    iteration's determinism while surviving nearly repeated top singular
    values, where plain G·v steps stall.

    The start vector is the normalised all-ones vector, replaced by e₁ when
    the Rayleigh quotient after two iterations says it sits in the null
    space. Stops when the estimate changes by at most ``tol`` relative. If
    ``max_iters`` is exhausted the best estimate is returned and a
    :class:`ConvergenceWarning` is emitted. The result is clamped to
    ``frob_norm(a)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    fro = frob_norm(a)
    if fro == 0.0:
        return 0.0
    if min(a.shape) == 1:
        return fro

    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    # trace(gram) == 1 after this, so every eigenvalue is in [0, 1]
    gram = gram / (fro * fro)
    n = gram.shape[0]
    v0 = np.full(n, 1.0 / np.sqrt(n))

    power = gram
    lam = -1.0
    converged = False
    restarted = False
    for it in range(1, max_iters + 1):
        w = power @ v0
        lam_new = _rayleigh(gram, w)
        if it == 2 and not restarted and lam_new <= 1e-14:
            v0 = np.zeros(n)
            v0[0] = 1.0
            restarted = True
            power = gram
            lam = -1.0
            continue
        if lam >= 0.0 and abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            converged = True
            break
        lam = lam_new
        power = power @ power
        power = 0.5 * (power + power.T)
        tr = np.trace(power)
        if tr <= 0.0:
            break
        power /= tr
    if not converged:
        warnings.warn(
            f"op_norm: power iteration did not reach tol={tol} in {max_iters} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    sigma = fro * np.sqrt(max(lam, 0.0))
    return float(min(sigma, fro))


def _rayleigh(gram: np.ndarray, w: np.ndarray) -> float:
    wn = float(np.sqrt(w @ w))
    if wn == 0.0:
        return 0.0
    v = w / wn
    return float(v @ (gram @ v))
