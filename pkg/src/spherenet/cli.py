"""Command line entry point: ``spherenet train | grid | eval``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

from .data import apply_scaling, load_csv
from .errors import ContractError, DataError, NumericError
from .model_io import load_model
from .trainer import (GRID_HEADER, GRID_MEAN_HEADER, TrainConfig, grid_experiment, rms_error, train,
                      write_table)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def parse_int_list(text: str) -> list:
    """``"0..39"`` (inclusive), ``"1,4,9"`` or a mix such as ``"0..3,10"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty integer list: {text!r}")
    return out


def parse_range(text: str) -> list:
    """Inclusive ``start:step:stop`` (e.g. ``15:5:35``), ``start:stop`` or a comma list."""
    text = str(text).strip()
    if ":" not in text:
        return parse_int_list(text)
    parts = [int(p) for p in text.split(":")]
    if len(parts) == 2:
        start, step, stop = parts[0], 1, parts[1]
    elif len(parts) == 3:
        start, step, stop = parts
    else:
        raise ConfigError(f"bad range {text!r}")
    if step <= 0 or stop < start:
        raise ConfigError(f"bad range {text!r}")
    return list(range(start, stop + 1, step))


def parse_float_list(text: str) -> list:
    return [float(t) for t in str(text).split(",") if t.strip()]


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys use flag names (dashes or underscores)."""
    out = {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--data", help="CSV with input columns followed by target columns")
    p.add_argument("--method", choices=["ad", "mm"])
    p.add_argument("--iters", type=int, help="iterations per run")
    p.add_argument("--seeds", help="e.g. 0..39 or 1,2,3")
    p.add_argument("--eps", type=float, help="trust region for the ad method (default pi/6)")
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--split-seed", type=int, help="fixed shuffle seed (default: the run seed)")
    p.add_argument("--op-tol", type=float)
    p.add_argument("--op-max-iters", type=int)
    p.add_argument("--out", help="output CSV")
    p.add_argument("--bit-reproducible", action="store_true", default=None,
                   help="write wall_ms as 0 so identical runs give identical files")
    p.add_argument("--no-check", dest="check", action="store_false", default=None,
                   help="skip the per-iteration slope consistency assertion")
    p.add_argument("--safeguard", action="store_true", default=None,
                   help="ad method: compare the loss at the candidate stepsizes")
    p.add_argument("--jobs", type=int, help="seeds trained in parallel")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spherenet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one layer configuration over several seeds")
    _common(p)
    p.add_argument("--dims", help="layer sizes, e.g. 12,25,30,15,3")
    p.add_argument("--mus", help="per-layer sphere radii (default all 1)")
    p.add_argument("--model-dir", help="directory for the final model of every seed")

    p = sub.add_parser("grid", help="train over a width x depth grid")
    _common(p)
    p.add_argument("--widths", help="e.g. 15:5:35")
    p.add_argument("--depths", help="e.g. 4:2:12 (number of layer sizes, input and output included)")
    p.add_argument("--d-in", type=int)
    p.add_argument("--d-out", type=int)

    p = sub.add_parser("eval", help="RMS error of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=["train", "test", "all"], default="test")
    return parser


def _settings(args) -> dict:
    s = read_config_file(args.config) if getattr(args, "config", None) else {}
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command", "verbose"):
            s[k] = v
    return s


def _config(s: dict, dims) -> TrainConfig:
    def get(key, conv, default=None):
        if key not in s:
            return default
        v = s[key]
        try:
            return conv(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {v!r}") from exc

    def flag(v):
        return v if isinstance(v, bool) else str(v).lower() in _TRUE

    cfg = TrainConfig(dims=dims)
    cfg.data = get("data", str)
    cfg.mus = get("mus", parse_float_list)
    cfg.method = get("method", str, "ad")
    cfg.iterations = get("iters", int, cfg.iterations)
    cfg.eps = get("eps", float, math.pi / 6)
    cfg.seeds = get("seeds", parse_int_list, [0])
    cfg.train_fraction = get("train_fraction", float, cfg.train_fraction)
    cfg.split_seed = get("split_seed", int)
    cfg.op_tol = get("op_tol", float, cfg.op_tol)
    cfg.op_max_iters = get("op_max_iters", int, cfg.op_max_iters)
    cfg.out = get("out", str)
    cfg.model_dir = get("model_dir", str)
    cfg.bit_reproducible = get("bit_reproducible", flag, False)
    cfg.check_consistency = get("check", flag, True)
    cfg.safeguard = get("safeguard", flag, False)
    cfg.jobs = get("jobs", int, 1)
    return cfg


def cmd_train(args) -> int:
    s = _settings(args)
    if "dims" not in s:
        raise ConfigError("--dims is required")
    cfg = _config(s, parse_int_list(s["dims"]))
    runs = train(cfg)
    for r in runs:
        status = "ok" if r.ok else f"aborted ({r.error})"
        line = f"seed {r.seed}: {status}, train_rms={rms_error(r.net, r.data, 'train'):.6g}"
        if len(r.data.test):
            line += f", test_rms={rms_error(r.net, r.data, 'test'):.6g}"
        print(line)
    return EXIT_OK if all(r.ok for r in runs) else EXIT_NUMERIC


def cmd_grid(args) -> int:
    s = _settings(args)
    for key in ("widths", "depths"):
        if key not in s:
            raise ConfigError(f"--{key} is required")
    d_in = int(s.get("d_in", 12))
    d_out = int(s.get("d_out", 3))
    cfg = _config(s, [d_in, d_out])
    long_rows, mean_rows = grid_experiment(parse_range(s["widths"]), parse_range(s["depths"]), cfg)
    out = Path(cfg.out or "grid.csv")
    write_table(out, GRID_HEADER, long_rows)
    mean_path = out.with_name(out.stem + "_mean" + out.suffix)
    write_table(mean_path, GRID_MEAN_HEADER, mean_rows)
    for m in mean_rows:
        print(f"W={m['width']} L={m['depth']}: train_rms={m['train_rms_mean']:.6g} "
              f"test_rms={m['test_rms_mean']:.6g} failures={m['failures']}")
    print(f"wrote {out} and {mean_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    if model.y_max is None or model.gain is None:
        raise ContractError("model file has no data-scaling record; cannot report physical units")
    dims = model.net.dims
    frac = model.train_fraction if model.train_fraction is not None else 0.8
    seed = model.split_seed if model.split_seed is not None else 0
    raw = load_csv(args.data, dims[0], dims[-1], frac, seed)
    data = apply_scaling(raw, model.y_max, model.gain)
    rms = rms_error(model.net, data, args.split)
    print(f"split={args.split} rms={rms!r}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"train": cmd_train, "grid": cmd_grid, "eval": cmd_eval}[args.command]
    try:
        return handler(args)
    except (ConfigError, ContractError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
