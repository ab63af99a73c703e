"""Classical-to-quantum encodings: angle (the pipeline default), basis, amplitude.

Angle encoding loads each entry of a classical vector as the rotation angle
of a single-qubit gate, producing a product state. It is the only encoding
with gradient support, which the feature-extraction pipeline relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .gates import Axis
from .statevector import Statevector

# Slope of feature_to_angle; multiply circuit input gradients by this to get
# derivatives with respect to the raw feature.
FEATURE_ANGLE_SLOPE = math.pi / 2


@dataclass(frozen=True)
class AngleEncodingConfig:
    """How classical entries map to rotation angles.

    scale is radians per unit input; inputs in [0, 1] land in [0, scale].
    The default pi keeps the map injective (0 and 2*pi encode identically,
    so the full 2*pi range is available but not the default).
    """

    axis: Axis = Axis.X
    scale: float = math.pi

    def __post_init__(self):
        if not 0.0 < self.scale <= 2 * math.pi:
            raise ValueError(f"scale must be in (0, 2*pi], got {self.scale}")


def _check_finite(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ShapeError(f"expected a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector contains non-finite entries")
    return x


def qubit_states_for_angles(angles: np.ndarray, axis: Axis) -> np.ndarray:
    """Per-qubit 2-vectors R_axis(angle)|0>, stacked as an (n, 2) array."""
    angles = np.asarray(angles, dtype=np.float64)
    c = np.cos(angles / 2)
    s = np.sin(angles / 2)
    if axis is Axis.X:
        return np.stack([c + 0j, -1j * s], axis=-1)
    if axis is Axis.Y:
        return np.stack([c + 0j, s + 0j], axis=-1)
    return np.stack([np.exp(-1j * angles / 2), np.zeros_like(c) + 0j], axis=-1)


def state_from_angles(angles: np.ndarray, axis: Axis = Axis.X) -> Statevector:
    """Product state with qubit j prepared as R_axis(angles[j])|0>."""
    angles = _check_finite(angles)
    vecs = qubit_states_for_angles(angles, axis)
    amps = np.array([1.0 + 0j])
    for v in vecs:  # qubit 0 first: most significant bit
        amps = np.kron(amps, v)
    return Statevector(amps, check=False)


def angle_encode(x: np.ndarray, config: AngleEncodingConfig = AngleEncodingConfig()) -> Statevector:
    """Angle-encode a classical vector: qubit j carries R(scale * x_j)|0>."""
    x = _check_finite(x)
    return state_from_angles(config.scale * x, config.axis)


def basis_encode(x: np.ndarray, threshold: float) -> Statevector:
    """Computational basis state with bit j set iff x_j >= threshold."""
    x = _check_finite(x)
    n = x.size
    index = 0
    for xj in x:
        index = (index << 1) | int(xj >= threshold)
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[index] = 1.0
    return Statevector(amps, check=False)


def amplitude_encode(x: np.ndarray) -> Statevector:
    """State whose amplitudes are x normalized; length must be a power of two."""
    x = _check_finite(x)
    n = x.size
    if n & (n - 1) != 0:
        raise ShapeError(f"amplitude encoding needs a power-of-two length, got {n} (no implicit padding)")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("cannot amplitude-encode the zero vector")
    return Statevector((x / norm).astype(np.complex128), check=False)


def feature_to_angle(f: float) -> float:
    """Affine map of a feature in [-1, 1] onto a rotation angle in [0, pi].

    Inputs are clamped at the boundary (tolerance 1e-9 for float noise).
    The constant derivative is FEATURE_ANGLE_SLOPE.
    """
    f = float(f)
    if f < -1.0 - 1e-9 or f > 1.0 + 1e-9:
        f = min(max(f, -1.0), 1.0)
    f = min(max(f, -1.0), 1.0)
    return (f + 1.0) * math.pi / 2
