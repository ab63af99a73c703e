"""Experiment configuration: one JSON file drives every run.

Shipped presets (see sqnn/presets/) cover the standard model geometries;
`resolve_config` accepts either a filesystem path or a preset name.
Validation errors carry the offending field path.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .encoding import AngleEncodingConfig
from .errors import ConfigError
from .gates import Axis
from .orchestrator import (
    Model,
    Strategy,
    build_single_device_model,
    build_sqnn_model,
)
from .training import TrainConfig
from .vqc import ReadoutPrep

MODEL_KINDS = ("single", "sqnn")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    raw: dict
    model_kind: str
    image_shape: tuple[int, int]
    blocks: int
    predictor_blocks: int
    extractor_capacities: tuple[int, ...] | None
    strategy: Strategy
    axis_sequence: tuple[Axis, ...]
    readout_prep: ReadoutPrep
    encoding: AngleEncodingConfig
    train: TrainConfig
    threads: int
    data_dir: str | None
    digits: tuple[int, int]
    train_limit: int | None
    val_limit: int | None

    def build_model(self) -> Model:
        if self.model_kind == "single":
            return build_single_device_model(
                self.image_shape,
                n_blocks=self.blocks,
                axis_sequence=self.axis_sequence,
                readout_prep=self.readout_prep,
                encoding=self.encoding,
            )
        return build_sqnn_model(
            self.image_shape,
            list(self.extractor_capacities),
            strategy=self.strategy,
            extractor_blocks=self.blocks,
            predictor_blocks=self.predictor_blocks,
            axis_sequence=self.axis_sequence,
            readout_prep=self.readout_prep,
            encoding=self.encoding,
        )


def _expect(mapping: dict, field: str, path: str, kind, default=None, required=False):
    if field not in mapping or mapping[field] is None:
        if required:
            raise ConfigError(f"{path}.{field}", "missing required field")
        return default
    value = mapping[field]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}.{field}", f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _parse_axis(value: str, path: str) -> Axis:
    try:
        return Axis(value.upper())
    except (ValueError, AttributeError):
        raise ConfigError(path, f"expected one of X, Y, Z, got {value!r}") from None


def parse_config(raw: dict, name: str = "config") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    model = _expect(raw, "model", "config", dict, required=True)
    kind = _expect(model, "kind", "model", str, required=True)
    if kind not in MODEL_KINDS:
        raise ConfigError("model.kind", f"expected one of {MODEL_KINDS}, got {kind!r}")

    shape = _expect(model, "image_shape", "model", list, required=True)
    if len(shape) != 2 or not all(isinstance(v, int) and v >= 1 for v in shape):
        raise ConfigError("model.image_shape", f"expected [height, width] of positive integers, got {shape!r}")
    image_shape = (shape[0], shape[1])

    blocks = _expect(model, "blocks", "model", int, default=3)
    if blocks < 1:
        raise ConfigError("model.blocks", f"must be >= 1, got {blocks}")
    predictor_blocks = _expect(model, "predictor_blocks", "model", int, default=1)
    if predictor_blocks < 1:
        raise ConfigError("model.predictor_blocks", f"must be >= 1, got {predictor_blocks}")

    caps = None
    if kind == "sqnn":
        caps_raw = _expect(model, "extractor_capacities", "model", list, required=True)
        if not caps_raw or not all(isinstance(c, int) and c >= 1 for c in caps_raw):
            raise ConfigError("model.extractor_capacities", f"expected positive integers, got {caps_raw!r}")
        caps = tuple(caps_raw)

    strategy_name = _expect(model, "strategy", "model", str, default=Strategy.EVEN_NO_OVERLAP.value)
    try:
        strategy = Strategy(strategy_name)
    except ValueError:
        raise ConfigError(
            "model.strategy", f"expected one of {[s.value for s in Strategy]}, got {strategy_name!r}"
        ) from None

    axes_raw = _expect(model, "axis_sequence", "model", list, default=["Y", "Z"])
    if not axes_raw:
        raise ConfigError("model.axis_sequence", "must not be empty")
    axis_sequence = tuple(_parse_axis(a, "model.axis_sequence") for a in axes_raw)

    prep_name = _expect(model, "readout_prep", "model", str, default=ReadoutPrep.PLUS_STATE.value)
    try:
        readout_prep = ReadoutPrep(prep_name)
    except ValueError:
        raise ConfigError(
            "model.readout_prep", f"expected one of {[p.value for p in ReadoutPrep]}, got {prep_name!r}"
        ) from None

    enc = _expect(raw, "encoding", "config", dict, default={})
    enc_axis = _parse_axis(_expect(enc, "axis", "encoding", str, default="X"), "encoding.axis")
    enc_scale = _expect(enc, "scale", "encoding", float, default=math.pi)
    try:
        encoding = AngleEncodingConfig(axis=enc_axis, scale=enc_scale)
    except ValueError as e:
        raise ConfigError("encoding.scale", str(e)) from None

    tr = _expect(raw, "train", "config", dict, default={})
    train = TrainConfig(
        learning_rate=_expect(tr, "learning_rate", "train", float, default=0.02),
        batch_size=_expect(tr, "batch_size", "train", int, default=32),
        epochs=_expect(tr, "epochs", "train", int, default=1),
        loss=_expect(tr, "loss", "train", str, default="mse"),
        seed=_expect(tr, "seed", "train", int, default=0),
        engine=_expect(tr, "engine", "train", str, default="fast"),
        init_scale=_expect(tr, "init_scale", "train", float, default=float(math.pi)),
    )
    threads = _expect(tr, "threads", "train", int, default=1)
    if threads < 1:
        raise ConfigError("train.threads", f"must be >= 1, got {threads}")

    data = _expect(raw, "data", "config", dict, default={})
    data_dir = _expect(data, "dir", "data", str, default=None)
    digits_raw = _expect(data, "digits", "data", list, default=[3, 6])
    if len(digits_raw) != 2 or not all(isinstance(d, int) and 0 <= d <= 9 for d in digits_raw):
        raise ConfigError("data.digits", f"expected two digits, got {digits_raw!r}")
    train_limit = _expect(data, "train_limit", "data", int, default=None)
    val_limit = _expect(data, "val_limit", "data", int, default=None)
    for fname, limit in (("train_limit", train_limit), ("val_limit", val_limit)):
        if limit is not None and limit < 1:
            raise ConfigError(f"data.{fname}", f"must be >= 1, got {limit}")

    cfg = ExperimentConfig(
        name=name,
        raw=raw,
        model_kind=kind,
        image_shape=image_shape,
        blocks=blocks,
        predictor_blocks=predictor_blocks,
        extractor_capacities=caps,
        strategy=strategy,
        axis_sequence=axis_sequence,
        readout_prep=readout_prep,
        encoding=encoding,
        train=train,
        threads=threads,
        data_dir=data_dir,
        digits=(digits_raw[0], digits_raw[1]),
        train_limit=train_limit,
        val_limit=val_limit,
    )
    try:
        cfg.build_model()  # geometry errors surface at config time, not mid-run
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError("model", str(e)) from None
    return cfg


def preset_names() -> list[str]:
    files = resources.files("sqnn").joinpath("presets")
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def resolve_config(name_or_path: str) -> ExperimentConfig:
    """Load a config from a file path or a shipped preset name."""
    path = Path(name_or_path)
    if path.exists():
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON in {path}: {e}") from None
        return parse_config(raw, name=path.stem)
    preset = resources.files("sqnn").joinpath("presets").joinpath(f"{name_or_path}.json")
    if preset.is_file():
        return parse_config(json.loads(preset.read_text()), name=name_or_path)
    raise ConfigError("config", f"{name_or_path!r} is neither a file nor a preset ({', '.join(preset_names())})")
