"""Descent direction on the product of spheres and the two automatic stepsize rules.

Every step moves all layers along great circles W_i cos t + μ_i V_i sin t
with one shared angle τ. The "ad" rule picks τ from the second-order Taylor
model of the loss along that curve; the "mm" rule minimises a sinusoidal
majorant of the loss over [0, π].
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ContractError, NumericError
from .jets import curve_eval
from .matrix_core import OP_NORM_MAX_ITERS, OP_NORM_TOL, frob_inner, frob_norm, op_norm
from .network import NetworkParams, loss_and_grad
from .sphere import SpherePoint, TangentVector, exp_map, project_tangent

DEFAULT_EPS = math.pi / 6
DEGENERATE_RTOL = 1e-14
TIE_RTOL = 1e-14
GSS_WIDTH = 1e-8
CONSISTENCY_RTOL = 1e-9

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Branch(str, Enum):
    ZERO_GRAD = "zero_grad"
    TRUST_BOUNDARY = "trust_boundary"
    INTERIOR_OPTIMUM = "interior_optimum"
    LINESEARCH = "linesearch"


@dataclass(frozen=True)
class UpdateDirection:
    """Normalised negative Riemannian gradient per layer, plus α and β.

    Layers whose tangent gradient vanishes are marked degenerate; their
    direction is the zero matrix and they do not move.
    """

    dirs: tuple
    alpha: float
    beta: float
    raw_tangent_norms: tuple
    degenerate: tuple

    @property
    def stationary(self) -> bool:
        return all(self.degenerate)


@dataclass(frozen=True)
class MajorantConstants:
    alpha: float
    beta: float
    Q: float
    w_op_norms: tuple
    P2: float
    tol: float = OP_NORM_TOL
    max_iters: int = OP_NORM_MAX_ITERS


@dataclass(frozen=True)
class StepResult:
    tau: float
    branch: Branch
    diagnostics: dict = field(default_factory=dict)


def riemannian_direction(net: NetworkParams, grads) -> UpdateDirection:
    """V_i = −Proj(∇_i)/‖Proj(∇_i)‖, α = Σ⟨∇_i, W_i⟩, β = Σ √(‖μ_i∇_i‖² − ⟨∇_i, W_i⟩²).

    β is accumulated as Σ μ_i‖Proj(∇_i)‖, which equals the radical when
    ‖W_i‖ = μ_i but does not cancel catastrophically when ∇_i is nearly
    radial. The radical itself is still formed to catch inconsistent input.
    """
    if len(grads) != len(net):
        raise ContractError(f"{len(grads)} gradients for {len(net)} layers")
    dirs, norms, degen = [], [], []
    alpha = 0.0
    beta = 0.0
    for p, g in zip(net.layers, grads):
        g = np.asarray(g, dtype=np.float64)
        radial = frob_inner(g, p.W)
        alpha += radial
        mg2 = (p.mu * frob_norm(g)) ** 2
        radicand = mg2 - radial * radial
        if radicand < -1e-9 * mg2:
            raise NumericError(f"negative radicand {radicand!r} in β: layer is off its sphere")
        P = project_tangent(p, g)
        pn = P.norm
        gn = frob_norm(g)
        norms.append(pn)
        if gn == 0.0 or pn <= DEGENERATE_RTOL * gn:
            dirs.append(TangentVector(np.zeros_like(p.W), p))
            degen.append(True)
            continue
        dirs.append(TangentVector(-P.V / pn, p))
        degen.append(False)
        beta += p.mu * pn
    return UpdateDirection(tuple(dirs), float(alpha), float(beta), tuple(norms), tuple(degen))


def _is_zero(x: float, scale: float) -> bool:
    return abs(x) <= TIE_RTOL * scale


def ad_stepsize(d1: float, d2: float, eps: float = DEFAULT_EPS, objective=None) -> StepResult:
    """Pick τ ∈ [0, eps] from the quadratic model L̄(0) + d1·t + d2·t²/2.

    With ``objective`` (a callable t ↦ L̄(t)) the candidates {0, eps, t*}
    are compared on the true objective instead of trusting the model.
    """
    if math.isnan(d1) or math.isnan(d2) or math.isnan(eps):
        raise NumericError("NaN passed to the stepsize rule")
    if not eps > 0:
        raise ContractError(f"trust region must be positive, got {eps}")
    diag = {"d1": d1, "d2": d2}
    scale = max(1.0, abs(d1), abs(d2))
    if _is_zero(d2, scale):
        if _is_zero(d1, scale):
            return StepResult(0.0, Branch.ZERO_GRAD, diag)
        res = StepResult(eps, Branch.TRUST_BOUNDARY, diag)
    else:
        t_star = -d1 / d2
        diag["t_star"] = t_star
        if 0.0 <= t_star <= eps:
            res = StepResult(t_star, Branch.INTERIOR_OPTIMUM, diag)
        else:
            res = StepResult(eps, Branch.TRUST_BOUNDARY, diag)
    if objective is None:
        return res

    cands = [(0.0, Branch.ZERO_GRAD), (eps, Branch.TRUST_BOUNDARY)]
    t_star = diag.get("t_star")
    if t_star is not None and 0.0 <= t_star <= eps:
        cands.append((t_star, Branch.INTERIOR_OPTIMUM))
    best = min(cands, key=lambda c: (objective(c[0]), c[0]))
    return StepResult(best[0], best[1], diag)


def majorant_constants(net: NetworkParams, direction: UpdateDirection, Q: float,
                       tol: float = OP_NORM_TOL, max_iters: int = OP_NORM_MAX_ITERS) -> MajorantConstants:
    ops = tuple(op_norm(p.W, tol, max_iters) for p in net.layers)
    P2 = 1.0
    for s in ops:
        P2 *= s
    return MajorantConstants(direction.alpha, direction.beta, float(Q), ops, P2, tol, max_iters)


def _dir_matrix(d) -> np.ndarray:
    return np.asarray(getattr(d, "V", d), dtype=np.float64)


def p1(consts: MajorantConstants, mus, W, dirs, t: float) -> float:
    """Π_i (‖W_i‖_op + ‖W_i(cos t − 1) + μ_i V_i sin t‖_op).

    A zero direction marks a frozen layer, whose displacement is zero.
    """
    c1 = math.cos(t) - 1.0
    s = math.sin(t)
    out = 1.0
    for w_op, mu, Wi, d in zip(consts.w_op_norms, mus, W, dirs):
        V = _dir_matrix(d)
        if c1 == 0.0 and s == 0.0 or not np.any(V):
            delta = 0.0
        else:
            delta = op_norm(Wi * c1 + (mu * s) * V, consts.tol, consts.max_iters)
        out *= w_op + delta
    return out


def majorant_value(consts: MajorantConstants, mus, W, dirs, t: float, loss0: float = 0.0) -> float:
    """ℒ(w) + α(cos t − 1) − β sin t + (Q/2)(P₁(t) − P₂)²."""
    gap = p1(consts, mus, W, dirs, t) - consts.P2
    return loss0 + consts.alpha * (math.cos(t) - 1.0) - consts.beta * math.sin(t) + 0.5 * consts.Q * gap * gap


def golden_section(f, a: float, b: float, width: float = GSS_WIDTH) -> tuple:
    """Shrink [a, b] around a local minimiser of ``f`` until it is narrower than ``width``.

    Returns ``(x, f(x))`` for the best point evaluated.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd < best[1]:
                best = (d, fd)
    return best


def mm_stepsize(consts: MajorantConstants, mus, W, dirs, loss0: float) -> StepResult:
    """Minimise the majorant over [0, π]; the endpoints always compete with the search result."""
    if consts.beta == 0.0 and all(not np.any(_dir_matrix(d)) for d in dirs):
        return StepResult(0.0, Branch.ZERO_GRAD, {"majorant": loss0})

    def m(t):
        return majorant_value(consts, mus, W, dirs, t, loss0)

    t_gs, m_gs = golden_section(m, 0.0, math.pi)
    cands = [(0.0, loss0), (t_gs, m_gs), (math.pi, m(math.pi))]
    # strict improvement required to leave the origin
    tau, val = cands[0]
    for t, v in cands[1:]:
        if v < val:
            tau, val = t, v
    return StepResult(tau, Branch.LINESEARCH, {"majorant": val})


def apply_update(net: NetworkParams, direction: UpdateDirection, tau: float) -> NetworkParams:
    """Move every non-degenerate layer by the exponential map with angle ``tau``."""
    if tau < 0:
        raise ContractError(f"stepsize must be nonnegative, got {tau}")
    if len(direction.dirs) != len(net):
        raise ContractError("direction does not match the network depth")
    layers = []
    for p, d, deg in zip(net.layers, direction.dirs, direction.degenerate):
        if d.base is not p and not np.array_equal(d.base.W, p.W):
            raise ContractError("direction was computed at a different network")
        if deg or tau == 0.0:
            layers.append(p)
        else:
            layers.append(exp_map(p, d, tau))
    return NetworkParams(tuple(layers), net.activation)


@dataclass
class StepReport:
    """Everything computed during one optimisation step."""

    loss: float
    direction: UpdateDirection
    step: StepResult
    net: NetworkParams


def check_slope(d1: float, beta: float) -> None:
    """Assert the curve slope from jets agrees with −β from the gradient."""
    if abs(d1 + beta) > CONSISTENCY_RTOL * max(abs(beta), abs(d1), 1e-300):
        raise NumericError(f"slope mismatch: L̄'(0) = {d1!r} but −β = {-beta!r}")


def ad_step(net: NetworkParams, train, eps: float = DEFAULT_EPS, loss_grad=None,
            check: bool = True, safeguard: bool = False) -> StepReport:
    """One iteration of the Taylor-model method on the full batch ``train``."""
    value, grads = loss_grad if loss_grad is not None else loss_and_grad(net, train)
    direction = riemannian_direction(net, grads)
    if direction.stationary:
        return StepReport(value, direction, StepResult(0.0, Branch.ZERO_GRAD, {"d1": 0.0, "d2": 0.0}), net)
    _, d1, d2 = curve_eval(net, direction.dirs, train)
    if check:
        check_slope(d1, direction.beta)
    objective = None
    if safeguard:
        from .network import loss as _loss

        def objective(t):
            return _loss(apply_update(net, direction, t), train) if t else value

    step = ad_stepsize(d1, d2, eps, objective)
    return StepReport(value, direction, step, apply_update(net, direction, step.tau))


def mm_step(net: NetworkParams, train, Q: float, loss_grad=None, check: bool = False,
            tol: float = OP_NORM_TOL, max_iters: int = OP_NORM_MAX_ITERS) -> StepReport:
    """One iteration of the majorisation-minimisation method."""
    value, grads = loss_grad if loss_grad is not None else loss_and_grad(net, train)
    direction = riemannian_direction(net, grads)
    if direction.stationary:
        return StepReport(value, direction, StepResult(0.0, Branch.ZERO_GRAD, {"majorant": value}), net)
    if check:
        _, d1, _ = curve_eval(net, direction.dirs, train)
        check_slope(d1, direction.beta)
    consts = majorant_constants(net, direction, Q, tol, max_iters)
    step = mm_stepsize(consts, net.mus, net.weights, direction.dirs, value)
    return StepReport(value, direction, step, apply_update(net, direction, step.tau))
