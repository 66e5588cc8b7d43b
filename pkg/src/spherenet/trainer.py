"""Seeded training runs, RMS evaluation and the width/depth grid."""

import csv
import io
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import ScaledDataset, Split, normalise_data, read_csv_rows, spectral_initialise, split_rows
from .errors import ContractError, NumericError
from .matrix_core import OP_NORM_MAX_ITERS, OP_NORM_TOL
from .network import NetworkParams, loss, loss_and_grad, predict
from .optimizers import DEFAULT_EPS, ad_step, mm_step

log = logging.getLogger(__name__)

METHODS = ("ad", "mm")
METRICS_HEADER = ["seed", "iteration", "train_objective", "test_objective", "tau", "branch", "wall_ms"]
GRID_HEADER = ["width", "depth", "seed", "status", "iterations", "train_rms", "test_rms",
               "train_objective", "test_objective", "median_tau", "wall_s"]
GRID_MEAN_HEADER = ["width", "depth", "runs", "failures", "train_rms_mean", "train_rms_std",
                    "test_rms_mean", "test_rms_std", "wall_s_mean"]


@dataclass
class TrainConfig:
    dims: list
    data: str | None = None
    mus: list | None = None
    method: str = "ad"
    iterations: int = 200
    eps: float = DEFAULT_EPS
    seeds: list = field(default_factory=lambda: [0])
    train_fraction: float = 0.8
    # None: each run shuffles with its own seed
    split_seed: int | None = None
    op_tol: float = OP_NORM_TOL
    op_max_iters: int = OP_NORM_MAX_ITERS
    out: str | None = None
    model_dir: str | None = None
    bit_reproducible: bool = False
    check_consistency: bool = True
    safeguard: bool = False
    jobs: int = 1

    def validate(self) -> None:
        if len(self.dims) < 2 or any(int(d) < 1 for d in self.dims):
            raise ContractError(f"dims must list at least two positive sizes, got {self.dims}")
        self.dims = [int(d) for d in self.dims]
        if self.mus is None:
            self.mus = [1.0] * (len(self.dims) - 1)
        if len(self.mus) != len(self.dims) - 1 or any(not m > 0 for m in self.mus):
            raise ContractError("mus must give one positive radius per layer")
        if self.method not in METHODS:
            raise ContractError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.iterations < 1:
            raise ContractError("iterations must be at least 1")
        if not self.eps > 0:
            raise ContractError("eps must be positive")
        if not self.seeds:
            raise ContractError("at least one seed is required")
        if not 0.0 < self.train_fraction < 1.0:
            raise ContractError("train_fraction must lie in (0, 1)")
        if self.jobs < 1:
            raise ContractError("jobs must be at least 1")


@dataclass
class MetricsRow:
    seed: int
    iteration: int
    train_objective: float
    test_objective: float
    tau: float
    branch: str
    wall_ms: float

    def as_csv(self) -> list:
        return [self.seed, self.iteration, repr(self.train_objective), repr(self.test_objective),
                repr(self.tau), self.branch, repr(self.wall_ms)]


@dataclass
class SeedRun:
    seed: int
    rows: list
    net: NetworkParams
    data: ScaledDataset
    split_seed: int
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def rms_error(net: NetworkParams, data: ScaledDataset, split: str = "test") -> float:
    """Root mean square of the prediction error vector in physical units.

    sqrt(mean_n ‖(f(x_n) − y_n)·y_max/gain‖²): the vector-norm convention.
    """
    if data.y_max is None or data.gain is None:
        raise ContractError("dataset carries no scaling record")
    part = _split(data, split)
    if len(part) == 0:
        raise ContractError(f"the {split} split is empty")
    err = (predict(net, part.x) - part.y) * data.target_scale
    return float(np.sqrt(np.mean(np.einsum("ij,ij->i", err, err))))


def _split(data: ScaledDataset, split: str) -> Split:
    if split == "train":
        return data.train
    if split == "test":
        return data.test
    if split == "all":
        return Split(np.vstack([data.train.x, data.test.x]), np.vstack([data.train.y, data.test.y]))
    raise ContractError(f"unknown split {split!r}")


def prepare(cfg: TrainConfig, seed: int, rows: np.ndarray) -> tuple:
    """Split the raw rows, initialise the network and scale the data for one seed."""
    split_seed = seed if cfg.split_seed is None else cfg.split_seed
    raw = split_rows(rows, cfg.dims[0], cfg.train_fraction, split_seed)
    net = spectral_initialise(cfg.dims, cfg.mus, seed)
    data = normalise_data(raw, net, cfg.op_tol, cfg.op_max_iters)
    return net, data, split_seed


def run_seed(cfg: TrainConfig, seed: int, rows: np.ndarray) -> SeedRun:
    net, data, split_seed = prepare(cfg, seed, rows)
    train, test = data.train, data.test
    has_test = len(test) > 0
    out = []
    lg = loss_and_grad(net, train)
    t0 = time.perf_counter()
    for it in range(1, cfg.iterations + 1):
        if cfg.method == "ad":
            rep = ad_step(net, train, cfg.eps, loss_grad=lg, check=cfg.check_consistency,
                          safeguard=cfg.safeguard)
        else:
            rep = mm_step(net, train, data.Q, loss_grad=lg, check=cfg.check_consistency,
                          tol=cfg.op_tol, max_iters=cfg.op_max_iters)
        net = rep.net
        lg = loss_and_grad(net, train)
        test_obj = loss(net, test) if has_test else math.nan
        wall = 0.0 if cfg.bit_reproducible else (time.perf_counter() - t0) * 1e3
        finite = math.isfinite(lg[0]) and (not has_test or math.isfinite(test_obj))
        branch = rep.step.branch.value if finite else "nan_abort"
        out.append(MetricsRow(seed, it, lg[0], test_obj, rep.step.tau, branch, wall))
        if not finite:
            return SeedRun(seed, out, net, data, split_seed, error=f"non-finite objective at iteration {it}")
    return SeedRun(seed, out, net, data, split_seed)


def _run_seed_job(args):
    cfg, seed, rows = args
    return run_seed(cfg, seed, rows)


def train(cfg: TrainConfig, rows: np.ndarray | None = None) -> list:
    """Run every configured seed and return one :class:`SeedRun` per seed (in seed order).

    ``rows`` is the raw (N, d_in + d_out) data; when omitted it is read from
    ``cfg.data``. Metrics go to ``cfg.out`` and final models to
    ``cfg.model_dir`` when those are set.
    """
    cfg.validate()
    if rows is None:
        if cfg.data is None:
            raise ContractError("no dataset given")
        rows = read_csv_rows(cfg.data, cfg.dims[0], cfg.dims[-1])
    if rows.shape[1] != cfg.dims[0] + cfg.dims[-1]:
        raise ContractError(f"data has {rows.shape[1]} columns, dims need {cfg.dims[0] + cfg.dims[-1]}")

    jobs = [(cfg, s, rows) for s in cfg.seeds]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            runs = list(pool.map(_run_seed_job, jobs))
    else:
        runs = [_run_seed_job(j) for j in jobs]

    for r in runs:
        if r.ok:
            log.info("seed %d: train objective %.6g after %d iterations", r.seed, r.rows[-1].train_objective,
                     len(r.rows))
        else:
            log.warning("seed %d aborted: %s", r.seed, r.error)
    if cfg.out:
        write_metrics(cfg.out, runs)
    if cfg.model_dir:
        save_models(cfg, runs)
    return runs


def metrics_csv(runs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for r in runs:
        for row in r.rows:
            w.writerow(row.as_csv())
    return buf.getvalue()


def write_metrics(path, runs) -> None:
    Path(path).write_text(metrics_csv(runs), encoding="utf-8")


def save_models(cfg: TrainConfig, runs) -> None:
    from .model_io import SavedModel, save_model

    d = Path(cfg.model_dir)
    d.mkdir(parents=True, exist_ok=True)
    for r in runs:
        save_model(d / f"model_seed{r.seed}.txt",
                   SavedModel(r.net, r.data.y_max, r.data.gain, cfg.train_fraction, r.split_seed))


def grid_dims(width: int, depth: int, d_in: int = 12, d_out: int = 3) -> list:
    """Layer sizes for one grid cell: ``depth`` entries, all hidden ones equal to ``width``."""
    if depth < 2:
        raise ContractError("depth must be at least 2")
    return [d_in] + [width] * (depth - 2) + [d_out]


def grid_experiment(widths, depths, base_cfg: TrainConfig, rows: np.ndarray | None = None) -> tuple:
    """Train every (width, depth) cell; returns (long_rows, mean_rows) as lists of dicts.

    A failing cell is recorded with its error and the grid carries on.
    """
    widths, depths = list(widths), list(depths)
    if not widths or not depths:
        raise ContractError("grid ranges must be nonempty")
    d_in, d_out = base_cfg.dims[0], base_cfg.dims[-1]
    if rows is None:
        if base_cfg.data is None:
            raise ContractError("no dataset given")
        rows = read_csv_rows(base_cfg.data, d_in, d_out)
    long_rows, mean_rows = [], []
    for depth in depths:
        for width in widths:
            dims = grid_dims(width, depth, d_in, d_out)
            cfg = replace(base_cfg, dims=dims, mus=None, out=None, model_dir=None)
            cell = []
            try:
                t0 = time.perf_counter()
                runs = train(cfg, rows)
                wall = (time.perf_counter() - t0) / len(runs)
                for r in runs:
                    cell.append(_grid_row(width, depth, r, 0.0 if cfg.bit_reproducible else wall))
            except Exception as exc:  # noqa: BLE001 - record and move on
                log.warning("grid cell W=%d L=%d failed: %s", width, depth, exc)
                for s in cfg.seeds:
                    cell.append({"width": width, "depth": depth, "seed": s, "status": f"error: {exc}",
                                 "iterations": 0, "train_rms": math.nan, "test_rms": math.nan,
                                 "train_objective": math.nan, "test_objective": math.nan,
                                 "median_tau": math.nan, "wall_s": math.nan})
            long_rows.extend(cell)
            mean_rows.append(_grid_mean(width, depth, cell))
    return long_rows, mean_rows


def _grid_row(width, depth, run: SeedRun, wall: float) -> dict:
    last = run.rows[-1]
    has_test = len(run.data.test) > 0
    return {
        "width": width, "depth": depth, "seed": run.seed,
        "status": "ok" if run.ok else f"error: {run.error}",
        "iterations": len(run.rows),
        "train_rms": rms_error(run.net, run.data, "train"),
        "test_rms": rms_error(run.net, run.data, "test") if has_test else math.nan,
        "train_objective": last.train_objective, "test_objective": last.test_objective,
        "median_tau": statistics.median(r.tau for r in run.rows),
        "wall_s": wall,
    }


def _grid_mean(width, depth, cell) -> dict:
    ok = [c for c in cell if c["status"] == "ok"]

    def stats(key):
        vals = [c[key] for c in ok]
        if not vals:
            return math.nan, math.nan
        return statistics.fmean(vals), (statistics.stdev(vals) if len(vals) > 1 else 0.0)

    tr, tr_sd = stats("train_rms")
    te, te_sd = stats("test_rms")
    return {"width": width, "depth": depth, "runs": len(cell), "failures": len(cell) - len(ok),
            "train_rms_mean": tr, "train_rms_std": tr_sd, "test_rms_mean": te, "test_rms_std": te_sd,
            "wall_s_mean": stats("wall_s")[0]}


def write_table(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def assert_finite(runs) -> None:
    for r in runs:
        for row in r.rows:
            if not math.isfinite(row.train_objective):
                raise NumericError(f"seed {r.seed}: non-finite objective at iteration {row.iteration}")
