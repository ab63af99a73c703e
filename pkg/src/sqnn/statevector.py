"""Dense complex statevector of an n-qubit register.

Convention used everywhere in this package: qubit 0 is the most significant
bit of the basis index, so for a 2-qubit register the amplitude order is
|00>, |01>, |10>, |11| and qubit 1 toggles the least significant bit.

Gate application updates the amplitude buffer in place through strided
tensor views; the full 2^n x 2^n circuit matrix is never materialized here
(the dense-matrix route exists only as a test oracle).
"""
from __future__ import annotations

import numpy as np

from .errors import CapacityError, ShapeError
from .gates import is_unitary

MAX_QUBITS = 24  # simulator budget: 2^24 complex amplitudes = 256 MiB


class Statevector:
    """Amplitude vector of length 2^num_qubits, L2-normalized."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes: np.ndarray, *, check: bool = True):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size == 0 or (amps.size & (amps.size - 1)) != 0:
            raise ShapeError(f"amplitude vector length must be a power of two, got {amps.shape}")
        self.num_qubits = amps.size.bit_length() - 1
        if self.num_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.num_qubits} qubits exceeds the {MAX_QUBITS}-qubit budget")
        self.amplitudes = amps
        if check and abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise ValueError(f"state norm {np.linalg.norm(amps)} is not 1 within 1e-9")

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), check=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _tensor(self) -> np.ndarray:
        """View of the amplitudes as a (2,)*n tensor, axis q = qubit q."""
        return self.amplitudes.reshape((2,) * self.num_qubits)


def new_zero_state(num_qubits: int) -> Statevector:
    """All-qubits-|0> state on num_qubits qubits (1 <= num_qubits <= 24)."""
    if not 1 <= int(num_qubits) <= MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    amps = np.zeros(2 ** int(num_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps, check=False)


def _check_index(state: Statevector, qubit: int) -> int:
    qubit = int(qubit)
    if not 0 <= qubit < state.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.num_qubits}-qubit state")
    return qubit


def apply_single(state: Statevector, gate: np.ndarray, target: int, *, validate: bool = True) -> Statevector:
    """Apply a 2x2 unitary to the target qubit, in place. Returns the state."""
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ShapeError(f"single-qubit gate must be 2x2, got {gate.shape}")
    if validate and not is_unitary(gate):
        raise ValueError("gate matrix is not unitary within 1e-10")
    target = _check_index(state, target)

    t = np.moveaxis(state._tensor(), target, 0)
    out = np.tensordot(gate, t, axes=(1, 0))
    state.amplitudes[:] = np.moveaxis(out, 0, target).reshape(-1)
    return state


def apply_two(state: Statevector, gate: np.ndarray, q_a: int, q_b: int, *, validate: bool = True) -> Statevector:
    """Apply a 4x4 unitary to qubits (q_a, q_b), in place. Returns the state.

    The gate's 2-bit basis index is (bit of q_a, bit of q_b), q_a major.
    """
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (4, 4):
        raise ShapeError(f"two-qubit gate must be 4x4, got {gate.shape}")
    if validate and not is_unitary(gate):
        raise ValueError("gate matrix is not unitary within 1e-10")
    q_a = _check_index(state, q_a)
    q_b = _check_index(state, q_b)
    if q_a == q_b:
        raise IndexError(f"q_a and q_b must differ, both are {q_a}")

    n = state.num_qubits
    t = np.moveaxis(state._tensor(), (q_a, q_b), (0, 1)).reshape(4, -1)
    out = (gate @ t).reshape((2, 2) + (2,) * (n - 2))
    state.amplitudes[:] = np.moveaxis(out, (0, 1), (q_a, q_b)).reshape(-1)
    return state


def expectation_z(state: Statevector, readout: int) -> float:
    """Exact Pauli-Z expectation on the readout qubit: sum |a_i|^2 * (+/-1)."""
    readout = _check_index(state, readout)
    probs = np.abs(state._tensor()) ** 2
    p0 = probs.take(0, axis=readout).sum()
    p1 = probs.take(1, axis=readout).sum()
    return float(p0 - p1)


def append_qubit(state: Statevector, qubit_state: np.ndarray) -> Statevector:
    """New register with one extra qubit appended as the least significant bit."""
    v = np.asarray(qubit_state, dtype=np.complex128)
    if v.shape != (2,):
        raise ShapeError(f"appended qubit state must have 2 amplitudes, got {v.shape}")
    if state.num_qubits + 1 > MAX_QUBITS:
        raise CapacityError(f"appending would exceed the {MAX_QUBITS}-qubit budget")
    return Statevector(np.kron(state.amplitudes, v), check=False)
