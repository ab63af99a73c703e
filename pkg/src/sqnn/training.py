"""Losses, plain SGD, the mini-batch loop, and evaluation metrics.

Training is deterministic for a fixed config: parameter initialization and
epoch shuffling come from one seeded generator, per-sample gradients are
averaged in sample-index order, and updates happen only at batch boundaries.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ShapeError
from .orchestrator import (
    ENGINES,
    Model,
    SingleDeviceModel,
    batch_gradients,
    decision_values,
)

LOSS_KINDS = ("mse", "hinge")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.02
    batch_size: int = 32
    epochs: int = 1
    loss: str = "mse"
    seed: int = 0
    engine: str = "fast"
    # Initialization half-range in radians. Full-range (pi) works for the
    # small models; wide extractors need near-identity starts because the
    # readout response is a product over per-qubit factors and its gradients
    # decay with width at full-range random parameters.
    init_scale: float = float(np.pi)

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("train.learning_rate", f"must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError("train.batch_size", f"must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError("train.epochs", f"must be >= 1, got {self.epochs}")
        if self.loss not in LOSS_KINDS:
            raise ConfigError("train.loss", f"unknown loss {self.loss!r}, expected one of {LOSS_KINDS}")
        if self.engine not in ENGINES:
            raise ConfigError("train.engine", f"unknown engine {self.engine!r}, expected one of {ENGINES}")
        if not 0 < self.init_scale <= float(np.pi):
            raise ConfigError("train.init_scale", f"must be in (0, pi], got {self.init_scale}")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    mean_train_loss: float
    val_accuracy: float
    seconds: float


@dataclass
class TrainResult:
    model: Model
    history: list[EpochMetrics]
    best_accuracy: float
    best_epoch: int
    best_params: list[np.ndarray]
    best_rng_state: dict


def loss(kind: str, y_prime: float, y: float) -> tuple[float, float]:
    """Loss value and its derivative with respect to the prediction.

    mse:   L = (y' - y)^2,        dL/dy' = 2*(y' - y)
    hinge: L = max(0, 1 - y*y'),  dL/dy' = -y when y*y' < 1, else 0
    """
    L, dL = loss_values(kind, np.array([y_prime]), np.array([y]))
    return float(L[0]), float(dL[0])


def loss_values(kind: str, y_prime: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized loss and derivative over a batch."""
    y_prime = np.asarray(y_prime, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if kind == "mse":
        diff = y_prime - y
        return diff * diff, 2.0 * diff
    if kind == "hinge":
        margin = 1.0 - y * y_prime
        return np.maximum(0.0, margin), np.where(margin > 0.0, -y, 0.0)
    raise ConfigError("train.loss", f"unknown loss {kind!r}, expected one of {LOSS_KINDS}")


def sgd_step(params: np.ndarray, grads: np.ndarray, learning_rate: float) -> np.ndarray:
    """One gradient-descent update: params - learning_rate * grads."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape:
        raise ShapeError(f"params shape {params.shape} != grads shape {grads.shape}")
    return params - learning_rate * grads


def set_param_groups(model: Model, groups: Sequence[np.ndarray]) -> None:
    if isinstance(model, SingleDeviceModel):
        model.params = np.asarray(groups[0], dtype=np.float64)
        return
    model.extractors = [
        (dev, circ, np.asarray(g, dtype=np.float64))
        for (dev, circ, _), g in zip(model.extractors, groups[:-1])
    ]
    dev, circ, _ = model.predictor
    model.predictor = (dev, circ, np.asarray(groups[-1], dtype=np.float64))


def initialize_params(model: Model, rng: np.random.Generator, scale: float = float(np.pi)) -> None:
    """Independent uniform [-scale, scale] draws for every parameter group.

    Group order is extractors (ascending) then predictor, so a fixed seed
    fixes the whole initialization.
    """
    groups = [rng.uniform(-scale, scale, size=g.size) for g in model.param_groups()]
    set_param_groups(model, groups)


def train_batch(
    model: Model,
    batch: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
    threads: int = 1,
) -> tuple[Model, float]:
    """One SGD update from the batch-averaged per-sample gradients."""
    images, labels = batch
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if images.shape[0] == 0:
        raise ValueError("batch must not be empty")
    if images.shape[0] != labels.shape[0]:
        raise ShapeError(f"{images.shape[0]} samples vs {labels.shape[0]} labels")

    y_prime = decision_values(model, images, config.engine, threads)
    losses, dL_dy = loss_values(config.loss, y_prime, labels)
    grads = batch_gradients(model, images, dL_dy, config.engine, threads)
    groups = [
        sgd_step(g, grad, config.learning_rate) for g, grad in zip(model.param_groups(), grads)
    ]
    set_param_groups(model, groups)
    return model, float(losses.mean())


def evaluate_accuracy(
    model: Model,
    dataset: tuple[np.ndarray, np.ndarray],
    engine: str = "fast",
    threads: int = 1,
) -> float:
    """Fraction of samples where sign(y') matches the label; sign(0) counts as +1."""
    images, labels = dataset
    images = np.asarray(images, dtype=np.float64)
    if images.shape[0] == 0:
        raise ValueError("dataset must not be empty")
    y_prime = decision_values(model, images, engine, threads)
    predicted = np.where(y_prime >= 0.0, 1.0, -1.0)
    return float(np.mean(predicted == np.asarray(labels, dtype=np.float64)))


def train(
    model: Model,
    train_set: tuple[np.ndarray, np.ndarray],
    val_set: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
    threads: int = 1,
    on_epoch: Callable[[EpochMetrics], None] | None = None,
) -> TrainResult:
    """Seeded epoch loop over shuffled mini-batches, tracking best accuracy.

    Initializes all parameters from the config seed, then per epoch: one
    seeded permutation, sequential batch updates, and a validation pass.
    The best-accuracy parameter snapshot (with the generator state at the
    time it was taken) is kept for checkpointing. on_epoch, when given, is
    called with each epoch's metrics as soon as they exist (the CLI streams
    them to its append-only CSV).
    """
    images, labels = train_set
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if images.shape[0] == 0:
        raise ValueError("training set must not be empty")

    rng = np.random.default_rng(config.seed)
    initialize_params(model, rng, config.init_scale)

    history: list[EpochMetrics] = []
    best_accuracy = -1.0
    best_epoch = 0
    best_params = [g.copy() for g in model.param_groups()]
    best_rng_state = rng.bit_generator.state

    n = images.shape[0]
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        perm = rng.permutation(n)
        loss_sum = 0.0
        for lo in range(0, n, config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            model, batch_loss = train_batch(model, (images[idx], labels[idx]), config, threads)
            loss_sum += batch_loss * idx.size
        val_accuracy = evaluate_accuracy(model, val_set, config.engine, threads)
        seconds = time.perf_counter() - started
        history.append(EpochMetrics(epoch, loss_sum / n, val_accuracy, seconds))
        if on_epoch is not None:
            on_epoch(history[-1])
        if val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_epoch = epoch
            best_params = [g.copy() for g in model.param_groups()]
            best_rng_state = rng.bit_generator.state

    return TrainResult(model, history, best_accuracy, best_epoch, best_params, best_rng_state)
