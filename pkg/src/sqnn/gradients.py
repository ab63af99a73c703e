"""Exact circuit gradients via the parameter-shift rule, plus a finite-difference oracle.

Every trainable gate is generated by a Pauli product with eigenvalues +/-1,
so the expectation is a first-harmonic trigonometric function of each angle
and the pi/2 shift rule gives the exact derivative from two evaluations of
the same circuit at shifted parameters.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .encoding import state_from_angles
from .gates import Axis
from .vqc import CircuitSpec, check_params, evaluate
from .statevector import Statevector

SHIFT = math.pi / 2


def param_shift_grad(spec: CircuitSpec, params: np.ndarray, input_state: Statevector, k: int) -> float:
    """Exact dE/dtheta_k = [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2."""
    params = check_params(spec, params)
    if not 0 <= k < params.size:
        raise IndexError(f"parameter index {k} out of range for {params.size} parameters")
    shifted = params.copy()
    shifted[k] = params[k] + SHIFT
    e_plus = evaluate(spec, shifted, input_state)
    shifted[k] = params[k] - SHIFT
    e_minus = evaluate(spec, shifted, input_state)
    return (e_plus - e_minus) / 2.0


def input_grad(
    spec: CircuitSpec,
    params: np.ndarray,
    input_angles: np.ndarray,
    i: int,
    axis: Axis = Axis.X,
) -> float:
    """Exact dE/dangle_i for an angle-encoded input.

    The encoding rotation has a single-Pauli generator, so the same pi/2
    shift applies to the encoding angle itself. Multiply by
    encoding.FEATURE_ANGLE_SLOPE to chain through feature_to_angle.
    """
    angles = np.asarray(input_angles, dtype=np.float64)
    if not 0 <= i < angles.size:
        raise IndexError(f"input index {i} out of range for {angles.size} angles")
    shifted = angles.copy()
    shifted[i] = angles[i] + SHIFT
    e_plus = evaluate(spec, params, state_from_angles(shifted, axis))
    shifted[i] = angles[i] - SHIFT
    e_minus = evaluate(spec, params, state_from_angles(shifted, axis))
    return (e_plus - e_minus) / 2.0


def finite_diff_grad(evaluator: Callable[[np.ndarray], float], point: np.ndarray, i: int, eps: float = 1e-5) -> float:
    """Central difference [f(x + eps*e_i) - f(x - eps*e_i)] / (2*eps)."""
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must be in [1e-7, 1e-3], got {eps}")
    point = np.asarray(point, dtype=np.float64)
    shifted = point.copy()
    shifted[i] = point[i] + eps
    f_plus = evaluator(shifted)
    shifted[i] = point[i] - eps
    f_minus = evaluator(shifted)
    return (f_plus - f_minus) / (2.0 * eps)


def full_gradient(spec: CircuitSpec, params: np.ndarray, input_state: Statevector) -> np.ndarray:
    """All parameter partials; two circuit evaluations per parameter."""
    params = check_params(spec, params)
    return np.array(
        [param_shift_grad(spec, params, input_state, k) for k in range(params.size)],
        dtype=np.float64,
    )
