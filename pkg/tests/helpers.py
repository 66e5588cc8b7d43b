"""Shared synthetic data for the training and CLI tests."""

import numpy as np


def teacher_rows(n=60, dims=(4, 6, 3), seed=0, noise=0.05):
    """Rows ``[x | y]`` from a random ReLU teacher plus a little noise."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dims[0]))
    h = X
    mats = [rng.normal(size=(dims[i + 1], dims[i])) for i in range(len(dims) - 1)]
    for W in mats[:-1]:
        h = np.maximum(h @ W.T, 0)
    Y = h @ mats[-1].T + noise * rng.normal(size=(n, dims[-1]))
    return np.hstack([X, Y])


def write_rows(path, rows, header=True):
    lines = []
    if header:
        lines.append(",".join(f"c{i}" for i in range(rows.shape[1])))
    lines += [",".join(repr(float(v)) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path
