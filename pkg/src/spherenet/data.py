"""Dataset loading, spectral initialisation and data scaling."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DataError
from .network import RELU, NetworkParams, lipschitz_bound
from .sphere import SpherePoint

MIN_INPUT_NORM = 1e-12


@dataclass(frozen=True)
class Split:
    """Paired samples: ``x`` is (N, d_in), ``y`` is (N, d_out)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64, ndmin=2)
        y = np.array(self.y, dtype=np.float64, ndmin=2)
        if x.shape[0] != y.shape[0]:
            raise DataError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.shape[0]


@dataclass(frozen=True)
class RawDataset:
    train: Split
    test: Split

    def __post_init__(self):
        if len(self.train) == 0:
            raise DataError("training split is empty")


@dataclass(frozen=True)
class ScaledDataset:
    """Data after unit-norm input scaling and gain-matched target scaling.

    ``y_max`` and ``gain`` are frozen at initialisation: a scaled target maps
    back to physical units through ``y * y_max / gain``. The per-row input
    norms are kept so raw inputs can be reconstructed.
    """

    train: Split
    test: Split
    Q: float
    y_max: float
    gain: float
    train_x_norms: np.ndarray
    test_x_norms: np.ndarray

    @property
    def target_scale(self) -> float:
        """Factor converting scaled targets/predictions back to physical units."""
        return self.y_max / self.gain


def xavier_uniform(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    fan_out, fan_in = shape
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def spectral_initialise(dims, mus=None, seed: int = 0, activation=RELU) -> NetworkParams:
    """Uniform Xavier draw per layer, rescaled onto the sphere of radius μ_i."""
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise ContractError(f"need at least two positive layer sizes, got {dims}")
    n_layers = len(dims) - 1
    if mus is None:
        mus = [1.0] * n_layers
    if len(mus) != n_layers:
        raise ContractError(f"{len(mus)} radii given for {n_layers} layers")
    if any(not m > 0 for m in mus):
        raise ContractError("all sphere radii must be positive")

    rng = np.random.default_rng(seed)
    layers = []
    for i in range(n_layers):
        shape = (dims[i + 1], dims[i])
        W = xavier_uniform(rng, shape)
        if not np.any(W):
            W = xavier_uniform(rng, shape)
            if not np.any(W):
                raise ContractError(f"layer {i + 1} initialised to zero twice")
        layers.append(SpherePoint.from_matrix(W, mus[i]))
    return NetworkParams(tuple(layers), activation)


def _unit_rows(x: np.ndarray, split: str) -> tuple:
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(norms < MIN_INPUT_NORM)
    if bad.size:
        raise DataError(f"{split} row {int(bad[0])} has a zero-norm input")
    return x / norms[:, None], norms


def apply_scaling(raw: RawDataset, y_max: float, gain: float) -> ScaledDataset:
    """Scale ``raw`` with already-known factors (x ↦ x/‖x‖, y ↦ gain·y/y_max)."""
    if not y_max > 0:
        raise DataError("Y_max must be positive; every training target is zero")
    if not gain > 0:
        raise DataError("network gain must be positive")
    tx, tn = _unit_rows(raw.train.x, "train")
    if len(raw.test):
        vx, vn = _unit_rows(raw.test.x, "test")
    else:
        vx, vn = raw.test.x, np.zeros(0)
    c = gain / y_max
    train = Split(tx, raw.train.y * c)
    test = Split(vx, raw.test.y * c)
    sq = np.concatenate([np.einsum("ij,ij->i", tx, tx), np.einsum("ij,ij->i", vx, vx)])
    return ScaledDataset(train, test, float(np.mean(sq)), float(y_max), float(gain), tn, vn)


def normalise_data(raw: RawDataset, net: NetworkParams, tol: float = 1e-10, max_iters: int = 500) -> ScaledDataset:
    """Match the data to the initial network's ℓ²-gain.

    Inputs go to unit norm; targets are scaled so the largest training
    target norm equals Π‖W_i‖_op. Test targets use the same factor.
    """
    if raw.train.x.shape[1] != net.dims[0] or raw.train.y.shape[1] != net.dims[-1]:
        raise DataError(
            f"data has {raw.train.x.shape[1]} inputs / {raw.train.y.shape[1]} outputs, "
            f"network expects {net.dims[0]} / {net.dims[-1]}"
        )
    y_max = float(np.max(np.linalg.norm(raw.train.y, axis=1)))
    gain = lipschitz_bound(net, tol, max_iters)
    return apply_scaling(raw, y_max, gain)


def _parse_float(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise DataError(f"line {lineno}: cannot parse {tok.strip()!r} as a number") from None


def read_csv_rows(path, d_in: int, d_out: int) -> np.ndarray:
    """Read a numeric CSV into an (N, d_in + d_out) array, skipping one optional header."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    width = d_in + d_out
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not t.strip() for t in rec):
                continue
            if lineno == 1 and not _is_number(rec[0]):
                continue
            if len(rec) != width:
                raise DataError(f"line {lineno}: expected {width} columns, found {len(rec)}")
            rows.append([_parse_float(t, lineno) for t in rec])
    if not rows:
        raise DataError(f"{path} contains no data rows")
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{path} contains non-finite values")
    return arr


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def train_count(n: int, train_fraction: float) -> int:
    # round() guards products such as 0.29 * 100 = 28.999999999999996
    return math.floor(round(train_fraction * n, 9))


def split_rows(arr: np.ndarray, d_in: int, train_fraction: float, shuffle_seed: int) -> RawDataset:
    if not 0.0 < train_fraction < 1.0:
        raise ContractError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = arr.shape[0]
    perm = np.random.default_rng(shuffle_seed).permutation(n)
    k = train_count(n, train_fraction)
    tr, te = arr[perm[:k]], arr[perm[k:]]
    return RawDataset(Split(tr[:, :d_in], tr[:, d_in:]), Split(te[:, :d_in], te[:, d_in:]))


def load_csv(path, d_in: int, d_out: int, train_fraction: float = 0.8, shuffle_seed: int = 0) -> RawDataset:
    """Load, shuffle with a seeded generator and split into train/test (floor for train)."""
    arr = read_csv_rows(path, d_in, d_out)
    return split_rows(arr, d_in, train_fraction, shuffle_seed)
