"""Command-line entry points: train, eval, gradcheck, partition-preview.

Exit codes are stable:
  0  success
  2  invalid configuration or usage (message names the field)
  3  data errors (missing or malformed dataset files)
  4  corrupt or unreadable checkpoint
  5  gradient check violation
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, parse_config, preset_names, resolve_config
from .dataset import downscale_set, load_split, resolve_data_dir
from .encoding import state_from_angles
from .errors import CheckpointError, ConfigError, FormatError, PartitionError
from .gates import Axis
from .gradients import finite_diff_grad, input_grad, param_shift_grad
from .training import EpochMetrics, evaluate_accuracy, set_param_groups, train
from .vqc import ReadoutPrep, build_basic_model, evaluate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CHECKPOINT = 4
EXIT_GRADCHECK = 5

METRICS_SCHEMA = 1
METRICS_COLUMNS = ("epoch", "mean_train_loss", "val_accuracy")


def _load_datasets(cfg: ExperimentConfig, data_dir_arg: str | None) -> tuple:
    data_dir = resolve_data_dir(data_dir_arg or cfg.data_dir)
    train_data = load_split(data_dir, "train", keep=cfg.digits)
    val_data = load_split(data_dir, "test", keep=cfg.digits)
    train_data = downscale_set(train_data, cfg.image_shape).subset(cfg.train_limit)
    val_data = downscale_set(val_data, cfg.image_shape).subset(cfg.val_limit)
    return (train_data.images, train_data.labels), (val_data.images, val_data.labels)


class _MetricsWriter:
    """Append-only per-epoch CSV emission: deterministic columns in
    metrics.csv, wall-clock timing in the timings.csv sidecar."""

    def __init__(self, out_dir: Path):
        self.metrics = (out_dir / "metrics.csv").open("w", newline="")
        self.metrics.write(f"# metrics-schema: {METRICS_SCHEMA}\n")
        self.metrics.write(",".join(METRICS_COLUMNS) + "\n")
        self.timings = (out_dir / "timings.csv").open("w", newline="")
        self.timings.write("epoch,seconds\n")

    def __call__(self, m: EpochMetrics) -> None:
        csv.writer(self.metrics).writerow([m.epoch, repr(m.mean_train_loss), repr(m.val_accuracy)])
        self.metrics.flush()
        csv.writer(self.timings).writerow([m.epoch, f"{m.seconds:.6f}"])
        self.timings.flush()
        print(
            f"epoch {m.epoch:3d}  loss {m.mean_train_loss:.6f}  "
            f"val_acc {m.val_accuracy:.4f}  ({m.seconds:.2f}s)"
        )

    def close(self) -> None:
        self.metrics.close()
        self.timings.close()


def read_metrics(path: str | Path) -> list[dict]:
    """Parse a metrics.csv back into row dicts (schema line tolerated)."""
    rows = []
    with Path(path).open() as f:
        lines = [line for line in f if not line.startswith("#")]
    for row in csv.DictReader(lines):
        rows.append(
            {
                "epoch": int(row["epoch"]),
                "mean_train_loss": float(row["mean_train_loss"]),
                "val_accuracy": float(row["val_accuracy"]),
            }
        )
    return rows


def cmd_train(args: argparse.Namespace) -> int:
    try:
        cfg = resolve_config(args.config)
        if args.seed is not None:
            raw = dict(cfg.raw)
            raw["train"] = dict(raw.get("train", {}), seed=args.seed)
            cfg = parse_config(raw, name=cfg.name)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        train_set, val_set = _load_datasets(cfg, args.data_dir)
    except (FileNotFoundError, FormatError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA

    out_dir = Path(args.out_dir) if args.out_dir else Path("runs") / cfg.name
    out_dir.mkdir(parents=True, exist_ok=True)

    model = cfg.build_model()
    threads = args.threads if args.threads is not None else cfg.threads
    writer = _MetricsWriter(out_dir)
    try:
        result = train(model, train_set, val_set, cfg.train, threads=threads, on_epoch=writer)
    finally:
        writer.close()
    set_param_groups(result.model, result.best_params)
    save_checkpoint(
        out_dir / "checkpoint.json",
        cfg.raw,
        result.model,
        result.best_accuracy,
        result.best_epoch,
        result.best_rng_state,
    )
    print(f"best val_acc {result.best_accuracy:.4f} at epoch {result.best_epoch}")
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        ckpt = load_checkpoint(args.checkpoint)
    except CheckpointError as e:
        print(f"checkpoint error: {e}", file=sys.stderr)
        return EXIT_CHECKPOINT
    try:
        cfg = parse_config(ckpt.config, name="checkpoint")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        data_dir = resolve_data_dir(args.data_dir or cfg.data_dir)
        data = load_split(data_dir, args.split, keep=cfg.digits)
    except (FileNotFoundError, FormatError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA

    limit = args.limit if args.limit is not None else (cfg.val_limit if args.split == "test" else cfg.train_limit)
    data = downscale_set(data, cfg.image_shape).subset(limit)
    if len(data) == 0:
        print("eval set is empty", file=sys.stderr)
        return EXIT_CONFIG
    accuracy = evaluate_accuracy(ckpt.model, (data.images, data.labels), cfg.train.engine, args.threads or 1)
    print(f"accuracy {accuracy:.6f} on {len(data)} samples ({args.split} split)")
    return EXIT_OK


def _random_circuit(rng: np.random.Generator):
    n = int(rng.integers(1, 5))
    blocks = int(rng.integers(1, 4))
    axes = tuple(rng.choice([Axis.X, Axis.Y, Axis.Z]) for _ in range(blocks))
    prep = ReadoutPrep.PLUS_STATE if rng.random() < 0.5 else ReadoutPrep.ZERO_STATE
    spec = build_basic_model(n, blocks, axes, prep)
    params = rng.uniform(-np.pi, np.pi, spec.param_count)
    angles = rng.uniform(0.0, np.pi, n)
    return spec, params, angles


def cmd_gradcheck(args: argparse.Namespace) -> int:
    if args.trials < 1:
        print(f"--trials must be >= 1, got {args.trials}", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    worst_desc = "none"
    for trial in range(args.trials):
        spec, params, angles = _random_circuit(rng)
        state = state_from_angles(angles)

        def eval_params(p):
            return evaluate(spec, p, state)

        for k in range(spec.param_count):
            delta = abs(param_shift_grad(spec, params, state, k) - finite_diff_grad(eval_params, params, k))
            if delta > worst:
                worst, worst_desc = delta, f"trial {trial} parameter {k}"

        def eval_angles(a):
            return evaluate(spec, params, state_from_angles(a))

        for i in range(angles.size):
            delta = abs(input_grad(spec, params, angles, i) - finite_diff_grad(eval_angles, angles, i))
            if delta > worst:
                worst, worst_desc = delta, f"trial {trial} input {i}"
    print(f"gradcheck: {args.trials} random circuits, worst |shift - central diff| = {worst:.3e} ({worst_desc})")
    if worst > args.tolerance:
        print(f"violation: {worst:.3e} exceeds tolerance {args.tolerance:.3e} at {worst_desc}", file=sys.stderr)
        return EXIT_GRADCHECK
    print(f"pass: within tolerance {args.tolerance:.3e}")
    return EXIT_OK


def cmd_partition_preview(args: argparse.Namespace) -> int:
    try:
        cfg = resolve_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.model_kind != "sqnn":
        print("single-device model: the whole image is one segment", file=sys.stderr)
        return EXIT_CONFIG
    try:
        model = cfg.build_model()
    except PartitionError as e:
        print(f"partition error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(model.partition.render())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a config file or preset")
    p_train.add_argument("--config", required=True, help=f"config path or preset ({', '.join(preset_names())})")
    p_train.add_argument("--seed", type=int, default=None, help="override train.seed")
    p_train.add_argument("--threads", type=int, default=None, help="worker threads for extractor evaluation")
    p_train.add_argument("--out-dir", default=None, help="artifact directory (default runs/<config-name>)")
    p_train.add_argument("--data-dir", default=None, help="dataset directory (default $SQNN_DATA_DIR or ./data)")
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--data-dir", default=None)
    p_eval.add_argument("--split", choices=("train", "test"), default="test")
    p_eval.add_argument("--limit", type=int, default=None)
    p_eval.add_argument("--threads", type=int, default=None)
    p_eval.set_defaults(fn=cmd_eval)

    p_grad = sub.add_parser("gradcheck", help="compare shift-rule gradients against finite differences")
    p_grad.add_argument("--trials", type=int, default=20)
    p_grad.add_argument("--tolerance", type=float, default=1e-6)
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.set_defaults(fn=cmd_gradcheck)

    p_part = sub.add_parser("partition-preview", help="render a config's segment layout as text")
    p_part.add_argument("--config", required=True)
    p_part.set_defaults(fn=cmd_partition_preview)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
