"""Coordination of simulated quantum devices: input partitioning, feature
extraction, prediction, and gradient routing through the classical channel.

A model is either a single-device circuit over the whole input or a
multi-device arrangement in which each extractor device runs a circuit on
its own input segment and a predictor device fuses the extracted features.
Features travel between devices as plain real numbers; the in-process
hand-off uses an explicit record type so a networked transport could
replace it without touching any of the math.

Two execution engines produce identical values (cross-checked in tests):
"fast" evaluates circuits through the closed-form branch expansion in
fastsim; "statevector" routes through the dense simulator. Both compute
gradients with the parameter-shift rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .encoding import (
    FEATURE_ANGLE_SLOPE,
    AngleEncodingConfig,
    feature_to_angle,
    state_from_angles,
)
from .errors import CapacityError, PartitionError, ShapeError
from .fastsim import StarCircuit, expectations, input_shift_table, param_shift_table
from .gates import Axis
from .gradients import full_gradient, input_grad
from .vqc import CircuitSpec, ReadoutPrep, build_basic_model, evaluate

ENGINES = ("fast", "statevector")


class Role(enum.Enum):
    EXTRACTOR = "extractor"
    PREDICTOR = "predictor"


class Strategy(enum.Enum):
    EVEN_NO_OVERLAP = "even_no_overlap"
    UNEVEN_NO_OVERLAP = "uneven_no_overlap"
    EVEN_OVERLAP = "even_overlap"


@dataclass(frozen=True)
class DeviceSpec:
    device_id: str
    data_qubit_capacity: int
    role: Role

    def __post_init__(self):
        if self.data_qubit_capacity < 1:
            raise ValueError(f"device {self.device_id}: capacity must be >= 1")


@dataclass(frozen=True)
class FeatureRecord:
    """One feature crossing the classical channel between devices."""

    device_id: str
    sample_id: int
    feature: float


@dataclass(frozen=True)
class PartitionPlan:
    image_shape: tuple[int, int]
    segments: tuple[tuple[int, ...], ...]
    strategy: Strategy

    def __post_init__(self):
        h, w = self.image_shape
        total = h * w
        seen: dict[int, int] = {}
        for seg in self.segments:
            if not seg:
                raise PartitionError("empty segment in partition plan")
            if len(set(seg)) != len(seg):
                raise PartitionError("segment repeats a pixel index")
            for px in seg:
                if not 0 <= px < total:
                    raise PartitionError(f"pixel index {px} outside {h}x{w} image")
                seen[px] = seen.get(px, 0) + 1
        if len(seen) != total:
            raise PartitionError(f"partition does not cover all {total} pixels")
        if self.strategy is not Strategy.EVEN_OVERLAP and any(c != 1 for c in seen.values()):
            raise PartitionError("segments overlap under a no-overlap strategy")

    @property
    def num_segments(self) -> int:
        return len(self.segments)

    def overlap_counts(self) -> np.ndarray:
        """How many segments each pixel belongs to, as an (h, w) grid."""
        counts = np.zeros(self.image_shape[0] * self.image_shape[1], dtype=int)
        for seg in self.segments:
            for px in seg:
                counts[px] += 1
        return counts.reshape(self.image_shape)

    def render(self) -> str:
        """Text layout of the plan: segment ids per pixel, or coverage counts."""
        h, w = self.image_shape
        digits = "0123456789abcdefghijklmnopqrstuvwxyz"
        lines = [f"{h}x{w} image, {self.num_segments} segments, strategy {self.strategy.value}"]
        if self.strategy is Strategy.EVEN_OVERLAP:
            lines.append("pixel coverage counts:")
            for row in self.overlap_counts():
                lines.append("".join(digits[min(c, 35)] for c in row))
        else:
            owner = np.full(h * w, -1, dtype=int)
            for i, seg in enumerate(self.segments):
                owner[list(seg)] = i
            for r in range(h):
                lines.append("".join(digits[owner[r * w + c] % 36] for c in range(w)))
        lines.append("segment sizes: " + " ".join(f"{i}:{len(s)}" for i, s in enumerate(self.segments)))
        return "\n".join(lines)


def _rect_segment(h: int, w: int, r0: int, r1: int, c0: int, c1: int) -> tuple[int, ...]:
    return tuple(r * w + c for r in range(r0, r1) for c in range(c0, c1))


def _grid_candidates(h: int, w: int, p: int) -> list[tuple[int, int]]:
    """(grid_rows, grid_cols) splits of the image into p tiles, squarest tiles first."""
    out = []
    for gr in range(1, p + 1):
        if p % gr == 0:
            gc = p // gr
            if h % gr == 0 and w % gc == 0:
                out.append((gr, gc))
    return sorted(out, key=lambda g: (abs(h // g[0] - w // g[1]), g[0]))


def _tile_uneven(h: int, w: int, caps: list[int]) -> list[tuple[int, int, int, int]] | None:
    """Exact-cover rectangles (r0, r1, c0, c1), one per capacity, in device order.

    Each rectangle is anchored at the first free cell in row-major order;
    backtracks over rectangle shapes, squarest first.
    """
    free = np.ones((h, w), dtype=bool)
    placed: list[tuple[int, int, int, int]] = []

    def first_free() -> tuple[int, int] | None:
        idx = np.argmax(free)
        return (int(idx // w), int(idx % w)) if free.flat[idx] else None

    def shapes(area: int) -> list[tuple[int, int]]:
        pairs = [(th, area // th) for th in range(1, area + 1) if area % th == 0]
        return sorted(pairs, key=lambda s: (abs(s[0] - s[1]), s[0]))

    def place(i: int) -> bool:
        if i == len(caps):
            return not free.any()
        anchor = first_free()
        if anchor is None:
            return False
        r, c = anchor
        for th, tw in shapes(caps[i]):
            if r + th > h or c + tw > w:
                continue
            region = free[r : r + th, c : c + tw]
            if region.all():
                region[:] = False
                placed.append((r, r + th, c, c + tw))
                if place(i + 1):
                    return True
                placed.pop()
                free[r : r + th, c : c + tw] = True
        return False

    return placed if place(0) else None


def make_partition(
    image_shape: tuple[int, int],
    devices: list[DeviceSpec],
    strategy: Strategy,
) -> PartitionPlan:
    """Assign image pixels to extractor devices as contiguous rectangular tiles."""
    h, w = int(image_shape[0]), int(image_shape[1])
    extractors = [d for d in devices if d.role is Role.EXTRACTOR]
    if not extractors:
        raise PartitionError("no extractor devices given")
    caps = [d.data_qubit_capacity for d in extractors]
    p = len(extractors)
    detail = f"capacities {caps} vs image {h}x{w}"

    if strategy is Strategy.UNEVEN_NO_OVERLAP:
        if sum(caps) != h * w:
            raise PartitionError(f"capacities must cover the image exactly: {detail}")
        rects = _tile_uneven(h, w, caps)
        if rects is None:
            raise PartitionError(f"no rectangular tiling matches the capacities: {detail}")
        segments = tuple(_rect_segment(h, w, *r) for r in rects)
        return PartitionPlan((h, w), segments, strategy)

    if len(set(caps)) != 1:
        raise PartitionError(f"{strategy.value} requires equal extractor capacities: {detail}")
    cap = caps[0]

    if strategy is Strategy.EVEN_NO_OVERLAP:
        for gr, gc in _grid_candidates(h, w, p):
            th, tw = h // gr, w // gc
            if th * tw == cap:
                segments = tuple(
                    _rect_segment(h, w, g // gc * th, (g // gc + 1) * th, g % gc * tw, (g % gc + 1) * tw)
                    for g in range(p)
                )
                return PartitionPlan((h, w), segments, strategy)
        raise PartitionError(f"no equal rectangular tiling matches: {detail}")

    # EVEN_OVERLAP: even grid with boundary rows/columns duplicated into both
    # neighbors; corner and edge tiles come out smaller than interior tiles.
    for gr, gc in _grid_candidates(h, w, p):
        th, tw = h // gr, w // gc
        worst = (th + 2 if gr > 2 else th + (1 if gr > 1 else 0)) * (tw + 2 if gc > 2 else tw + (1 if gc > 1 else 0))
        if worst > cap:
            continue
        segments = []
        for g in range(p):
            grow, gcol = g // gc, g % gc
            r0 = grow * th - (1 if grow > 0 else 0)
            r1 = (grow + 1) * th + (1 if grow < gr - 1 else 0)
            c0 = gcol * tw - (1 if gcol > 0 else 0)
            c1 = (gcol + 1) * tw + (1 if gcol < gc - 1 else 0)
            segments.append(_rect_segment(h, w, r0, r1, c0, c1))
        return PartitionPlan((h, w), tuple(segments), strategy)
    raise PartitionError(f"no overlap tiling fits the capacities: {detail}")


@dataclass
class SingleDeviceModel:
    """One circuit over the whole (flattened) input; readout is the prediction."""

    device: DeviceSpec
    circuit: CircuitSpec
    params: np.ndarray
    encoding: AngleEncodingConfig
    image_shape: tuple[int, int]

    def __post_init__(self):
        h, w = self.image_shape
        if self.circuit.num_data_qubits != h * w:
            raise ShapeError(f"circuit has {self.circuit.num_data_qubits} data qubits for a {h}x{w} image")
        if self.device.data_qubit_capacity < h * w:
            raise CapacityError(f"device {self.device.device_id} cannot load {h * w} pixels")

    def param_groups(self) -> list[np.ndarray]:
        return [self.params]


@dataclass
class SqnnModel:
    """Extractor circuits over input segments plus a predictor over their features."""

    extractors: list[tuple[DeviceSpec, CircuitSpec, np.ndarray]]
    predictor: tuple[DeviceSpec, CircuitSpec, np.ndarray]
    partition: PartitionPlan
    encoding: AngleEncodingConfig

    def __post_init__(self):
        p = len(self.extractors)
        if self.partition.num_segments != p:
            raise ShapeError(f"{p} extractors but {self.partition.num_segments} segments")
        dev, circ, _ = self.predictor
        if dev.role is not Role.PREDICTOR:
            raise ValueError("predictor device must have the predictor role")
        if circ.num_data_qubits != p:
            raise ShapeError(f"predictor has {circ.num_data_qubits} data qubits for {p} extractors")
        if dev.data_qubit_capacity < p:
            raise CapacityError(f"predictor capacity {dev.data_qubit_capacity} < {p} features")
        for i, ((d, c, _), seg) in enumerate(zip(self.extractors, self.partition.segments)):
            if d.role is not Role.EXTRACTOR:
                raise ValueError(f"extractor {i} device must have the extractor role")
            if c.num_data_qubits != len(seg):
                raise ShapeError(f"extractor {i}: {c.num_data_qubits} data qubits vs segment of {len(seg)}")
            if d.data_qubit_capacity < len(seg):
                raise CapacityError(f"extractor {i} capacity {d.data_qubit_capacity} < segment {len(seg)}")

    @property
    def num_extractors(self) -> int:
        return len(self.extractors)

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.partition.image_shape

    def param_groups(self) -> list[np.ndarray]:
        return [params for _, _, params in self.extractors] + [self.predictor[2]]


Model = SingleDeviceModel | SqnnModel


def build_single_device_model(
    image_shape: tuple[int, int],
    n_blocks: int = 3,
    axis_sequence: tuple[Axis, ...] = (Axis.Y, Axis.Z),
    readout_prep: ReadoutPrep = ReadoutPrep.PLUS_STATE,
    encoding: AngleEncodingConfig = AngleEncodingConfig(),
    device_id: str = "device-0",
) -> SingleDeviceModel:
    n = image_shape[0] * image_shape[1]
    circuit = build_basic_model(n, n_blocks, axis_sequence, readout_prep)
    device = DeviceSpec(device_id, n, Role.EXTRACTOR)
    return SingleDeviceModel(device, circuit, np.zeros(circuit.param_count), encoding, tuple(image_shape))


def build_sqnn_model(
    image_shape: tuple[int, int],
    extractor_capacities: list[int],
    strategy: Strategy = Strategy.EVEN_NO_OVERLAP,
    extractor_blocks: int = 3,
    predictor_blocks: int = 1,
    axis_sequence: tuple[Axis, ...] = (Axis.Y, Axis.Z),
    readout_prep: ReadoutPrep = ReadoutPrep.PLUS_STATE,
    encoding: AngleEncodingConfig = AngleEncodingConfig(),
) -> SqnnModel:
    """Model with one extractor per capacity and a predictor sized to p features."""
    devices = [DeviceSpec(f"extractor-{i}", c, Role.EXTRACTOR) for i, c in enumerate(extractor_capacities)]
    partition = make_partition(image_shape, devices, strategy)
    extractors = []
    for dev, seg in zip(devices, partition.segments):
        circ = build_basic_model(len(seg), extractor_blocks, axis_sequence, readout_prep)
        extractors.append((dev, circ, np.zeros(circ.param_count)))
    p = len(devices)
    pred_circ = build_basic_model(p, predictor_blocks, axis_sequence, readout_prep)
    pred_dev = DeviceSpec("predictor", p, Role.PREDICTOR)
    return SqnnModel(extractors, (pred_dev, pred_circ, np.zeros(pred_circ.param_count)), partition, encoding)


def _flat_sample(sample: np.ndarray, image_shape: tuple[int, int]) -> np.ndarray:
    flat = np.asarray(sample, dtype=np.float64).reshape(-1)
    expected = image_shape[0] * image_shape[1]
    if flat.size != expected:
        raise ShapeError(f"sample has {flat.size} pixels, model expects {expected}")
    return flat


def segment_angles(model: SqnnModel, sample: np.ndarray) -> list[np.ndarray]:
    """Row-major flattened segment pixels scaled to encoding angles."""
    flat = _flat_sample(sample, model.image_shape)
    return [model.encoding.scale * flat[list(seg)] for seg in model.partition.segments]


def _circuit_expectation(circ: CircuitSpec, params: np.ndarray, angles: np.ndarray, axis: Axis, engine: str) -> float:
    if engine == "fast":
        return float(expectations(StarCircuit.from_spec(circ), params, angles[None, :], axis)[0])
    if engine == "statevector":
        return evaluate(circ, params, state_from_angles(angles, axis))
    raise ValueError(f"unknown engine {engine!r}, expected one of {ENGINES}")


def extract_features(model: SqnnModel, sample: np.ndarray, engine: str = "fast") -> np.ndarray:
    """One feature per extractor, each from its own segment; order-free."""
    axis = model.encoding.axis
    return np.array(
        [
            _circuit_expectation(circ, params, angles, axis, engine)
            for (_, circ, params), angles in zip(model.extractors, segment_angles(model, sample))
        ]
    )


def predict(model: SqnnModel, features: np.ndarray, engine: str = "fast") -> float:
    """Predictor expectation over angle-encoded features; in [-1, 1]."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.num_extractors,):
        raise ShapeError(f"expected {model.num_extractors} features, got shape {features.shape}")
    angles = np.array([feature_to_angle(f) for f in features])
    _, circ, params = model.predictor
    return _circuit_expectation(circ, params, angles, model.encoding.axis, engine)


def forward(model: Model, sample: np.ndarray, engine: str = "fast") -> tuple[np.ndarray, float]:
    """Features and prediction for one sample. Single-device models yield p=1-style output."""
    if isinstance(model, SingleDeviceModel):
        angles = model.encoding.scale * _flat_sample(sample, model.image_shape)
        y = _circuit_expectation(model.circuit, model.params, angles, model.encoding.axis, engine)
        return np.array([y]), y
    features = extract_features(model, sample, engine)
    return features, predict(model, features, engine)


def _param_shift_row(circ: CircuitSpec, params: np.ndarray, angles: np.ndarray, axis: Axis, engine: str) -> np.ndarray:
    if engine == "fast":
        return param_shift_table(StarCircuit.from_spec(circ), params, angles[None, :], axis)[0]
    return full_gradient(circ, params, state_from_angles(angles, axis))


def _input_shift_row(circ: CircuitSpec, params: np.ndarray, angles: np.ndarray, axis: Axis, engine: str) -> np.ndarray:
    if engine == "fast":
        return input_shift_table(StarCircuit.from_spec(circ), params, angles[None, :], axis)[0]
    return np.array([input_grad(circ, params, angles, i, axis) for i in range(angles.size)])


def backward(
    model: Model,
    sample: np.ndarray,
    features: np.ndarray,
    y_prime: float,
    dL_dy: float,
    engine: str = "fast",
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Loss gradients for the predictor and each extractor via the chain rule.

    Predictor: dL/dtheta = dL/dy' * dy'/dtheta (parameter shift).
    Extractor i: dL/dtheta = dL/dy' * dy'/df_i * df_i/dtheta, where dy'/df_i
    chains the predictor's input gradient through the feature-to-angle slope.
    For single-device models the prediction is the circuit output itself and
    only one gradient group exists (returned in the extractor slot).
    """
    axis = model.encoding.axis
    if isinstance(model, SingleDeviceModel):
        angles = model.encoding.scale * _flat_sample(sample, model.image_shape)
        grads = dL_dy * _param_shift_row(model.circuit, model.params, angles, axis, engine)
        return np.zeros(0), [grads]

    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.num_extractors,):
        raise ShapeError(f"stale features: expected {model.num_extractors}, got shape {features.shape}")
    pred_angles = np.array([feature_to_angle(f) for f in features])
    _, pred_circ, pred_params = model.predictor
    pred_grads = dL_dy * _param_shift_row(pred_circ, pred_params, pred_angles, axis, engine)
    dy_df = _input_shift_row(pred_circ, pred_params, pred_angles, axis, engine) * FEATURE_ANGLE_SLOPE

    extractor_grads = []
    for i, ((_, circ, params), angles) in enumerate(zip(model.extractors, segment_angles(model, sample))):
        table = _param_shift_row(circ, params, angles, axis, engine)
        extractor_grads.append(dL_dy * dy_df[i] * table)
    return pred_grads, extractor_grads


def sequential_feature_records(
    single_device: DeviceSpec,
    model: SqnnModel,
    sample: np.ndarray,
    engine: str = "fast",
    sample_id: int = 0,
) -> list[FeatureRecord]:
    """One device serving every extractor role in order, emitting the
    classical-channel records a networked transport would carry."""
    max_segment = max(len(s) for s in model.partition.segments)
    needed = max(max_segment, model.num_extractors)
    if single_device.data_qubit_capacity < needed:
        raise CapacityError(
            f"device {single_device.device_id} has {single_device.data_qubit_capacity} data qubits,"
            f" needs {needed} to serve every role"
        )
    axis = model.encoding.axis
    records: list[FeatureRecord] = []
    for (_, circ, params), angles in zip(model.extractors, segment_angles(model, sample)):
        f = _circuit_expectation(circ, params, angles, axis, engine)
        records.append(FeatureRecord(single_device.device_id, sample_id, f))
    return records


def run_sequential(
    single_device: DeviceSpec,
    model: SqnnModel,
    sample: np.ndarray,
    engine: str = "fast",
    sample_id: int = 0,
) -> tuple[np.ndarray, float]:
    """Run every extractor role in order, then the predictor, on one device.

    Produces bit-identical outputs to forward(); the only difference is the
    schedule. Intermediate features are recorded classically between roles.
    """
    records = sequential_feature_records(single_device, model, sample, engine, sample_id)
    features = np.array([r.feature for r in records])
    return features, predict(model, features, engine)


# Batched helpers used by the training loop. Per-sample math is identical to
# forward()/backward(); samples are vectorized along the leading axis.


def _map_ordered(fn, items, threads: int):
    """Apply fn to items, optionally on worker threads, preserving order.

    Results are identical for any thread count: the work items are
    independent and collection order is fixed.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def _batch_angles(model: Model, images: np.ndarray) -> np.ndarray:
    images = np.asarray(images, dtype=np.float64)
    h, w = model.image_shape
    flat = images.reshape(images.shape[0], -1)
    if flat.shape[1] != h * w:
        raise ShapeError(f"samples have {flat.shape[1]} pixels, model expects {h * w}")
    return flat


def decision_values(model: Model, images: np.ndarray, engine: str = "fast", threads: int = 1) -> np.ndarray:
    """y' for a batch of samples: (S,)."""
    flat = _batch_angles(model, images)
    if engine == "statevector":
        return np.array([forward(model, s, engine)[1] for s in flat])
    axis = model.encoding.axis
    if isinstance(model, SingleDeviceModel):
        return expectations(StarCircuit.from_spec(model.circuit), model.params, model.encoding.scale * flat, axis)
    feats = np.stack(
        _map_ordered(
            lambda ext: expectations(
                StarCircuit.from_spec(ext[0][1]), ext[0][2], model.encoding.scale * flat[:, list(ext[1])], axis
            ),
            list(zip(model.extractors, model.partition.segments)),
            threads,
        ),
        axis=1,
    )
    _, pred_circ, pred_params = model.predictor
    pred_angles = (np.clip(feats, -1.0, 1.0) + 1.0) * (np.pi / 2)
    return expectations(StarCircuit.from_spec(pred_circ), pred_params, pred_angles, axis)


def batch_gradients(
    model: Model,
    images: np.ndarray,
    dL_dy: np.ndarray,
    engine: str = "fast",
    threads: int = 1,
) -> list[np.ndarray]:
    """Mean loss gradient per parameter group, given per-sample dL/dy'.

    Group order matches Model.param_groups(). Equals the sample-index-ordered
    mean of per-sample backward() results.
    """
    flat = _batch_angles(model, images)
    dL_dy = np.asarray(dL_dy, dtype=np.float64)

    if engine == "statevector":
        groups = [np.zeros_like(g) for g in model.param_groups()]
        for s in range(flat.shape[0]):
            features, y = forward(model, flat[s], engine)
            pred_g, ext_g = backward(model, flat[s], features, y, dL_dy[s], engine)
            per_sample = ext_g if isinstance(model, SingleDeviceModel) else ext_g + [pred_g]
            for acc, g in zip(groups, per_sample):
                acc += g
        return [g / flat.shape[0] for g in groups]

    axis = model.encoding.axis
    if isinstance(model, SingleDeviceModel):
        table = param_shift_table(
            StarCircuit.from_spec(model.circuit), model.params, model.encoding.scale * flat, axis
        )
        return [(dL_dy[:, None] * table).mean(axis=0)]

    seg_angles = [model.encoding.scale * flat[:, list(seg)] for seg in model.partition.segments]
    feats = np.stack(
        _map_ordered(
            lambda pair: expectations(StarCircuit.from_spec(pair[0][1]), pair[0][2], pair[1], axis),
            list(zip(model.extractors, seg_angles)),
            threads,
        ),
        axis=1,
    )
    _, pred_circ, pred_params = model.predictor
    pred_star = StarCircuit.from_spec(pred_circ)
    pred_angles = (np.clip(feats, -1.0, 1.0) + 1.0) * (np.pi / 2)
    pred_table = param_shift_table(pred_star, pred_params, pred_angles, axis)
    dy_df = input_shift_table(pred_star, pred_params, pred_angles, axis) * FEATURE_ANGLE_SLOPE

    tables = _map_ordered(
        lambda pair: param_shift_table(StarCircuit.from_spec(pair[0][1]), pair[0][2], pair[1], axis),
        list(zip(model.extractors, seg_angles)),
        threads,
    )
    groups = []
    for i, table in enumerate(tables):
        weight = dL_dy * dy_df[:, i]
        groups.append((weight[:, None] * table).mean(axis=0))
    groups.append((dL_dy[:, None] * pred_table).mean(axis=0))
    return groups
