"""Checkpoint files: model geometry, parameters, config snapshot, RNG state.

JSON with a sha256 content hash over the canonical serialization of every
other field. Floats survive the round trip bit-exactly (shortest-repr), so
a reloaded model reproduces forward outputs identically.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import AngleEncodingConfig
from .errors import CheckpointError
from .gates import Axis
from .orchestrator import (
    DeviceSpec,
    Model,
    PartitionPlan,
    Role,
    SingleDeviceModel,
    SqnnModel,
    Strategy,
)
from .vqc import CircuitSpec, ReadoutPrep, build_basic_model

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    format_version: int
    config: dict
    model: Model
    best_accuracy: float
    best_epoch: int
    rng_state: dict


def _circuit_dict(device: DeviceSpec, circuit: CircuitSpec, params: np.ndarray) -> dict:
    return {
        "device_id": device.device_id,
        "capacity": device.data_qubit_capacity,
        "role": device.role.value,
        "num_data_qubits": circuit.num_data_qubits,
        "readout_prep": circuit.readout_prep.value,
        "block_axes": [a.value for a in circuit.block_axes],
        "params": [float(v) for v in params],
    }


def _circuit_from_dict(entry: dict) -> tuple[DeviceSpec, CircuitSpec, np.ndarray]:
    device = DeviceSpec(entry["device_id"], entry["capacity"], Role(entry["role"]))
    axes = tuple(Axis(a) for a in entry["block_axes"])
    circuit = build_basic_model(
        entry["num_data_qubits"],
        len(axes),
        axis_sequence=axes,
        readout_prep=ReadoutPrep(entry["readout_prep"]),
    )
    params = np.array(entry["params"], dtype=np.float64)
    if params.shape != (circuit.param_count,):
        raise CheckpointError(f"checkpoint params for {device.device_id} have wrong length")
    return device, circuit, params


def _model_dict(model: Model) -> dict:
    enc = {"axis": model.encoding.axis.value, "scale": model.encoding.scale}
    if isinstance(model, SingleDeviceModel):
        return {
            "kind": "single",
            "image_shape": list(model.image_shape),
            "encoding": enc,
            "circuits": [_circuit_dict(model.device, model.circuit, model.params)],
        }
    return {
        "kind": "sqnn",
        "image_shape": list(model.image_shape),
        "encoding": enc,
        "partition": {
            "strategy": model.partition.strategy.value,
            "segments": [list(s) for s in model.partition.segments],
        },
        "circuits": [_circuit_dict(*e) for e in model.extractors] + [_circuit_dict(*model.predictor)],
    }


def _model_from_dict(entry: dict) -> Model:
    encoding = AngleEncodingConfig(axis=Axis(entry["encoding"]["axis"]), scale=entry["encoding"]["scale"])
    image_shape = (entry["image_shape"][0], entry["image_shape"][1])
    circuits = [_circuit_from_dict(c) for c in entry["circuits"]]
    if entry["kind"] == "single":
        device, circuit, params = circuits[0]
        return SingleDeviceModel(device, circuit, params, encoding, image_shape)
    partition = PartitionPlan(
        image_shape,
        tuple(tuple(s) for s in entry["partition"]["segments"]),
        Strategy(entry["partition"]["strategy"]),
    )
    return SqnnModel(circuits[:-1], circuits[-1], partition, encoding)


def _content_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def save_checkpoint(
    path: str | Path,
    config: dict,
    model: Model,
    best_accuracy: float,
    best_epoch: int,
    rng_state: dict,
) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "config": config,
        "model": _model_dict(model),
        "best_accuracy": float(best_accuracy),
        "best_epoch": int(best_epoch),
        "rng_state": rng_state,
    }
    payload["content_hash"] = _content_hash({k: v for k, v in payload.items()})
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Parse and verify a checkpoint; raises CheckpointError on any corruption."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from None
    if not isinstance(payload, dict) or "content_hash" not in payload:
        raise CheckpointError(f"checkpoint {path} has no content hash")
    stored = payload.pop("content_hash")
    if _content_hash(payload) != stored:
        raise CheckpointError(f"checkpoint {path} failed its content-hash check")
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {payload.get('format_version')!r}")
    try:
        model = _model_from_dict(payload["model"])
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointError(f"malformed checkpoint model section: {e}") from None
    return Checkpoint(
        format_version=payload["format_version"],
        config=payload["config"],
        model=model,
        best_accuracy=payload["best_accuracy"],
        best_epoch=payload["best_epoch"],
        rng_state=payload["rng_state"],
    )
