"""Bias-free fully connected network with layer weights on spheres.

f(x; w) = W_L ρ(W_{L-1} ⋯ ρ(W_1 x)). Inputs are handled in batches: ``x``
may be one vector of length d_0 or an (N, d_0) array with one sample per row.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DimensionError
from .matrix_core import op_norm
from .sphere import SpherePoint


class Activation:
    """Elementwise activation with |ρ(x)| ≤ |x|, 1-Lipschitz and |ρ'| ≤ 1."""

    name = "activation"

    def __call__(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jet(self, v, d1, d2):
        """Propagate order-2 Taylor coefficients (value, first, second derivative)."""
        raise NotImplementedError


class ReLU(Activation):
    name = "relu"

    def __call__(self, z):
        return np.maximum(z, 0.0)

    def derivative(self, z):
        # subgradient 0 at the kink
        return (z > 0.0).astype(np.float64)

    def jet(self, v, d1, d2):
        active = v > 0.0
        return v * active, d1 * active, d2 * active


class Identity(Activation):
    """Linear activation; mainly useful for checking derivatives in closed form."""

    name = "identity"

    def __call__(self, z):
        return z

    def derivative(self, z):
        return np.ones_like(z)

    def jet(self, v, d1, d2):
        return v, d1, d2


RELU = ReLU()


@dataclass(frozen=True)
class NetworkParams:
    """Ordered layers; layer i is a d_i × d_{i-1} matrix acting as x ↦ W_i x."""

    layers: tuple
    activation: Activation = field(default=RELU, compare=False)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ContractError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].shape[1] != layers[i - 1].shape[0]:
                raise DimensionError(
                    f"layer {i + 1} expects input dim {layers[i].shape[1]}, "
                    f"layer {i} outputs {layers[i - 1].shape[0]}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def dims(self) -> list:
        return [self.layers[0].shape[1]] + [p.shape[0] for p in self.layers]

    @property
    def mus(self) -> list:
        return [p.mu for p in self.layers]

    @property
    def weights(self) -> list:
        return [p.W for p in self.layers]

    def __len__(self):
        return len(self.layers)


@dataclass
class LatentTrace:
    """Intermediate states of one forward pass.

    ``h[l]`` is the input to layer l+1 (so ``h[0]`` is x), ``preact[l]`` is
    W_{l+1} h[l], and ``output`` is f(x; w). Batched shapes carry a leading N.
    """

    h: list
    preact: list
    output: np.ndarray


def _as_batch(x, d: int, what: str) -> tuple:
    a = np.asarray(x, dtype=np.float64)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != d:
        raise DimensionError(f"{what} must have trailing dimension {d}, got shape {np.shape(x)}")
    return a, single


def forward(net: NetworkParams, x) -> LatentTrace:
    X, single = _as_batch(x, net.dims[0], "input")
    act = net.activation
    h = [X]
    pre = []
    for i, p in enumerate(net.layers):
        z = h[-1] @ p.W.T
        pre.append(z)
        if i < len(net.layers) - 1:
            h.append(act(z))
    out = pre[-1]
    if single:
        return LatentTrace([a[0] for a in h], [z[0] for z in pre], out[0])
    return LatentTrace(h, pre, out)


def predict(net: NetworkParams, x) -> np.ndarray:
    return forward(net, x).output


def _check_split(net: NetworkParams, data):
    X, _ = _as_batch(data.x, net.dims[0], "inputs")
    Y, _ = _as_batch(data.y, net.dims[-1], "targets")
    if X.shape[0] == 0:
        raise ContractError("loss over an empty dataset is undefined")
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(f"{X.shape[0]} inputs but {Y.shape[0]} targets")
    return X, Y


def loss(net: NetworkParams, data) -> float:
    """Mean over samples of ½‖f(x; w) − y‖².

    ``data`` is anything with ``x`` (N, d_0) and ``y`` (N, d_L) arrays.
    """
    X, Y = _check_split(net, data)
    r = predict(net, X) - Y
    return float(0.5 * np.einsum("ij,ij->", r, r) / X.shape[0])


def loss_and_grad(net: NetworkParams, data) -> tuple:
    """Loss and the ambient (Euclidean) gradient with respect to every W_i."""
    X, Y = _check_split(net, data)
    n = X.shape[0]
    tr = forward(net, X)
    r = tr.output - Y
    value = float(0.5 * np.einsum("ij,ij->", r, r) / n)
    g = r / n
    grads = [None] * len(net)
    for i in range(len(net) - 1, -1, -1):
        grads[i] = g.T @ tr.h[i]
        if i > 0:
            g = (g @ net.layers[i].W) * net.activation.derivative(tr.preact[i - 1])
    return value, grads


def grad_layerwise(net: NetworkParams, data) -> list:
    return loss_and_grad(net, data)[1]


def lipschitz_bound(net: NetworkParams, tol: float = 1e-10, max_iters: int = 500) -> float:
    """Product of layer operator norms: a global Lipschitz constant and ℓ²-gain of f."""
    out = 1.0
    for p in net.layers:
        out *= op_norm(p.W, tol, max_iters)
    return out


def network_from_matrices(mats, mus=None, activation: Activation = RELU) -> NetworkParams:
    """Build a network by projecting each matrix onto its sphere (μ defaults to its own norm)."""
    layers = []
    for i, m in enumerate(mats):
        m = np.asarray(m, dtype=np.float64)
        mu = float(np.linalg.norm(m)) if mus is None else mus[i]
        layers.append(SpherePoint.from_matrix(m, mu))
    return NetworkParams(tuple(layers), activation)
