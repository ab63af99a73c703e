"""Estimator-style interface so the classifier composes with sklearn tooling.

`SqnnClassifier` wraps model building and the training loop behind fit /
predict / decision_function / score with sklearn get_params semantics.
scikit-learn is optional: when it is installed the class inherits
BaseEstimator and ClassifierMixin, otherwise a minimal local base provides
compatible get_params/set_params.
"""
from __future__ import annotations

import inspect

import numpy as np

from .encoding import AngleEncodingConfig
from .errors import ShapeError
from .gates import Axis
from .orchestrator import Strategy, build_single_device_model, build_sqnn_model, decision_values
from .training import TrainConfig, evaluate_accuracy, set_param_groups, train
from .vqc import ReadoutPrep

try:
    from sklearn.base import BaseEstimator, ClassifierMixin
except ImportError:  # pragma: no cover - exercised only without sklearn

    class BaseEstimator:
        def get_params(self, deep=True):
            names = inspect.signature(type(self).__init__).parameters
            return {n: getattr(self, n) for n in names if n != "self"}

        def set_params(self, **params):
            valid = self.get_params()
            for key, value in params.items():
                if key not in valid:
                    raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
                setattr(self, key, value)
            return self

    class ClassifierMixin:
        def score(self, X, y):
            return float(np.mean(self.predict(X) == np.asarray(y)))


def _check_X(X, n_pixels: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ShapeError(f"X must be a non-empty 2-D array of flattened images, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if n_pixels is not None and X.shape[1] != n_pixels:
        raise ShapeError(f"X has {X.shape[1]} features, expected {n_pixels}")
    return X


class SqnnClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier over pixel vectors in [0, 1].

    With extractor_capacities=None the whole input feeds one circuit;
    otherwise the input is partitioned across that many simulated extractor
    devices and a predictor circuit fuses their features.

    Parameters mirror the experiment config; all are plain values so the
    estimator clones cleanly. Fitted attributes carry the trailing
    underscore convention (classes_, model_, history_, best_accuracy_).
    """

    def __init__(
        self,
        image_shape=(4, 4),
        extractor_capacities=None,
        blocks=3,
        predictor_blocks=1,
        strategy="even_no_overlap",
        axis_sequence=("Y", "Z"),
        readout_prep="plus",
        encoding_axis="X",
        encoding_scale=np.pi,
        learning_rate=0.02,
        batch_size=32,
        epochs=10,
        loss="mse",
        seed=0,
        engine="fast",
        init_scale=np.pi,
        validation_fraction=0.2,
    ):
        self.image_shape = image_shape
        self.extractor_capacities = extractor_capacities
        self.blocks = blocks
        self.predictor_blocks = predictor_blocks
        self.strategy = strategy
        self.axis_sequence = axis_sequence
        self.readout_prep = readout_prep
        self.encoding_axis = encoding_axis
        self.encoding_scale = encoding_scale
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.loss = loss
        self.seed = seed
        self.engine = engine
        self.init_scale = init_scale
        self.validation_fraction = validation_fraction

    def _build_model(self):
        encoding = AngleEncodingConfig(axis=Axis(self.encoding_axis), scale=float(self.encoding_scale))
        axes = tuple(Axis(a) if not isinstance(a, Axis) else a for a in self.axis_sequence)
        prep = ReadoutPrep(self.readout_prep)
        shape = (int(self.image_shape[0]), int(self.image_shape[1]))
        if self.extractor_capacities is None:
            return build_single_device_model(shape, self.blocks, axes, prep, encoding)
        return build_sqnn_model(
            shape,
            list(self.extractor_capacities),
            strategy=Strategy(self.strategy),
            extractor_blocks=self.blocks,
            predictor_blocks=self.predictor_blocks,
            axis_sequence=axes,
            readout_prep=prep,
            encoding=encoding,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        """Train on flattened images X (n_samples, h*w) with binary labels y."""
        X = _check_X(X)
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ShapeError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        self.classes_ = np.unique(y)
        if self.classes_.size != 2:
            raise ValueError(f"need exactly 2 classes, got {self.classes_.size}")
        signed = np.where(y == self.classes_[1], 1.0, -1.0)

        if X_val is None:
            n_val = max(1, int(round(self.validation_fraction * X.shape[0])))
            X_val, y_val_signed = X[:n_val], signed[:n_val]
        else:
            X_val = _check_X(X_val, X.shape[1])
            y_val_signed = np.where(np.asarray(y_val) == self.classes_[1], 1.0, -1.0)

        model = self._build_model()
        config = TrainConfig(
            learning_rate=float(self.learning_rate),
            batch_size=int(self.batch_size),
            epochs=int(self.epochs),
            loss=self.loss,
            seed=int(self.seed),
            engine=self.engine,
            init_scale=float(self.init_scale),
        )
        result = train(model, (X, signed), (X_val, y_val_signed), config)
        set_param_groups(result.model, result.best_params)
        self.model_ = result.model
        self.history_ = result.history
        self.best_accuracy_ = result.best_accuracy
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        """Raw circuit outputs y' in [-1, 1]; positive means classes_[1]."""
        self._check_fitted()
        X = _check_X(X, self.n_features_in_)
        return decision_values(self.model_, X, self.engine)

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.where(scores >= 0.0, self.classes_[1], self.classes_[0])

    def score(self, X, y) -> float:
        """Mean accuracy on the given data."""
        self._check_fitted()
        X = _check_X(X, self.n_features_in_)
        signed = np.where(np.asarray(y) == self.classes_[1], 1.0, -1.0)
        return evaluate_accuracy(self.model_, (X, signed), self.engine)

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("this SqnnClassifier instance is not fitted yet; call fit first")
