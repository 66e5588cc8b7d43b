"""Plain-text model files.

Layout (version 1), one item per line, whitespace separated::

    spherenet-model 1
    activation relu
    dims 12 25 30 15 3
    mus 1.0 1.0 1.0 1.0
    y_max <float>
    gain <float>
    train_fraction <float>
    split_seed <int>
    layer 1 25 12
    <25 lines of 12 floats, row-major>
    layer 2 30 25
    ...

Floats are written with ``repr`` so they round-trip exactly. ``y_max``,
``gain``, ``train_fraction`` and ``split_seed`` may be ``none`` for a model
saved without its data-scaling record. See docs/model_format.md.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .network import Identity, NetworkParams, RELU
from .sphere import SpherePoint

MAGIC = "spherenet-model"
FORMAT_VERSION = 1
_ACTIVATIONS = {"relu": RELU, "identity": Identity()}


@dataclass
class SavedModel:
    net: NetworkParams
    y_max: float | None = None
    gain: float | None = None
    train_fraction: float | None = None
    split_seed: int | None = None


def _opt(x) -> str:
    return "none" if x is None else repr(x)


def dump_model(model: SavedModel) -> str:
    net = model.net
    lines = [
        f"{MAGIC} {FORMAT_VERSION}",
        f"activation {net.activation.name}",
        "dims " + " ".join(str(d) for d in net.dims),
        "mus " + " ".join(repr(m) for m in net.mus),
        f"y_max {_opt(model.y_max)}",
        f"gain {_opt(model.gain)}",
        f"train_fraction {_opt(model.train_fraction)}",
        f"split_seed {_opt(model.split_seed)}",
    ]
    for i, p in enumerate(net.layers, start=1):
        r, c = p.shape
        lines.append(f"layer {i} {r} {c}")
        lines.extend(" ".join(repr(float(v)) for v in row) for row in p.W)
    return "\n".join(lines) + "\n"


def save_model(path, model: SavedModel) -> None:
    Path(path).write_text(dump_model(model), encoding="utf-8")


def _field(lines, i, key):
    parts = lines[i].split()
    if not parts or parts[0] != key:
        raise DataError(f"model file line {i + 1}: expected '{key}'")
    return parts[1:]


def _opt_float(tok):
    return None if tok == "none" else float(tok)


def parse_model(text: str) -> SavedModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        head = lines[0].split()
        if head[0] != MAGIC:
            raise DataError("not a spherenet model file")
        if int(head[1]) != FORMAT_VERSION:
            raise DataError(f"unsupported model format version {head[1]}")
        act_name = _field(lines, 1, "activation")[0]
        if act_name not in _ACTIVATIONS:
            raise DataError(f"unknown activation {act_name!r}")
        dims = [int(t) for t in _field(lines, 2, "dims")]
        mus = [float(t) for t in _field(lines, 3, "mus")]
        y_max = _opt_float(_field(lines, 4, "y_max")[0])
        gain = _opt_float(_field(lines, 5, "gain")[0])
        frac = _opt_float(_field(lines, 6, "train_fraction")[0])
        seed_tok = _field(lines, 7, "split_seed")[0]
        split_seed = None if seed_tok == "none" else int(seed_tok)
        if len(mus) != len(dims) - 1:
            raise DataError("model file: number of radii does not match the layer count")
        pos = 8
        layers = []
        for i in range(len(dims) - 1):
            idx, r, c = (int(t) for t in _field(lines, pos, "layer"))
            if idx != i + 1 or (r, c) != (dims[i + 1], dims[i]):
                raise DataError(f"model file: layer {i + 1} header does not match dims")
            rows = [[float(t) for t in lines[pos + 1 + k].split()] for k in range(r)]
            W = np.array(rows, dtype=np.float64)
            if W.shape != (r, c):
                raise DataError(f"model file: layer {i + 1} has wrong row lengths")
            layers.append(SpherePoint(W, mus[i]))
            pos += 1 + r
    except (IndexError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"malformed model file: {exc}") from None
    net = NetworkParams(tuple(layers), _ACTIVATIONS[act_name])
    return SavedModel(net, y_max, gain, frac, split_seed)


def load_model(path) -> SavedModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such model file: {path}")
    return parse_model(path.read_text(encoding="utf-8"))
