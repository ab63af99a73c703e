"""Fixed and parameterized gate matrices.

Single-qubit gates are 2x2 complex matrices, two-qubit Ising coupling gates
are 4x4. Rotations follow the half-angle convention exp(-i*P*theta/2), so a
2*pi turn flips the global sign of the matrix. Global phase is never
normalized away; matrix identities in tests are exact, not up-to-phase.
"""
from __future__ import annotations

import enum
import math

import numpy as np


class Axis(enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


_PAULI = {
    Axis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

_I2 = np.eye(2, dtype=complex)
_I4 = np.eye(4, dtype=complex)


def pauli(axis: Axis) -> np.ndarray:
    """Pauli matrix for the given axis (a pi rotation on the Bloch sphere)."""
    return _PAULI[axis].copy()


def hadamard() -> np.ndarray:
    """Hadamard gate: maps |0> and |1> to the equal-superposition states."""
    return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _check_finite_angle(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    return theta


def rotation(axis: Axis, theta: float) -> np.ndarray:
    """Single-qubit rotation exp(-i*P*theta/2) about the given Pauli axis.

    Closed form: cos(theta/2)*I - i*sin(theta/2)*P.
    """
    theta = _check_finite_angle(theta)
    return math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * _PAULI[axis]


def ising(axis: Axis, theta: float) -> np.ndarray:
    """Two-qubit coupling exp(-i*(P@P)*theta/2), the same rotation on both qubits.

    Closed form: cos(theta/2)*I4 - i*sin(theta/2)*kron(P, P). The generator
    kron(P, P) squares to the identity, which is what makes the pi/2
    parameter-shift rule exact for these gates.
    """
    theta = _check_finite_angle(theta)
    pp = np.kron(_PAULI[axis], _PAULI[axis])
    return math.cos(theta / 2) * _I4 - 1j * math.sin(theta / 2) * pp


def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    """True if matrix^dagger @ matrix is the identity within tol."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=tol))
