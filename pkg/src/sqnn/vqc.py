"""Layered variational circuits built from blocks of Ising coupling gates.

A circuit acts on n data qubits plus one readout qubit (always the last
qubit). Each block entangles every data qubit with the readout through one
parameterized coupling gate on a single Pauli axis; blocks repeat to add
depth, and every gate carries its own trainable angle. The circuit output is
the exact Pauli-Z expectation of the readout.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .gates import Axis, hadamard, ising
from .statevector import Statevector, append_qubit, apply_single, apply_two, expectation_z

DEFAULT_AXIS_SEQUENCE = (Axis.Y, Axis.Z)


class ReadoutPrep(enum.Enum):
    ZERO_STATE = "zero"
    PLUS_STATE = "plus"  # Hadamard on the readout before any block


@dataclass(frozen=True)
class Block:
    """One layer: a coupling gate from each data qubit to the readout."""

    axis: Axis
    param_offsets: tuple[int, ...]  # index into the circuit's parameter vector


@dataclass(frozen=True)
class CircuitSpec:
    num_data_qubits: int
    readout_prep: ReadoutPrep
    blocks: tuple[Block, ...]
    num_readout_qubits: int = 1

    def __post_init__(self):
        if self.num_data_qubits < 1:
            raise ValueError(f"need at least one data qubit, got {self.num_data_qubits}")
        if not self.blocks:
            raise ValueError("a trainable circuit needs at least one block")
        for b in self.blocks:
            if len(b.param_offsets) != self.num_data_qubits:
                raise ValueError("each block must reference every data qubit exactly once")

    @property
    def num_qubits(self) -> int:
        return self.num_data_qubits + self.num_readout_qubits

    @property
    def param_count(self) -> int:
        return self.num_data_qubits * len(self.blocks)

    @property
    def block_axes(self) -> tuple[Axis, ...]:
        return tuple(b.axis for b in self.blocks)


def build_basic_model(
    n_data: int,
    n_blocks: int,
    axis_sequence: tuple[Axis, ...] = DEFAULT_AXIS_SEQUENCE,
    readout_prep: ReadoutPrep = ReadoutPrep.PLUS_STATE,
) -> CircuitSpec:
    """Circuit with n_blocks blocks; block k uses axis_sequence[k mod len].

    Parameter layout is block-major: block k owns indices
    [k*n_data, (k+1)*n_data), one per data qubit in ascending order.
    """
    if n_data < 1 or n_blocks < 1:
        raise ValueError(f"n_data and n_blocks must be >= 1, got {n_data}, {n_blocks}")
    if not axis_sequence:
        raise ValueError("axis_sequence must not be empty")
    blocks = tuple(
        Block(
            axis=axis_sequence[k % len(axis_sequence)],
            param_offsets=tuple(range(k * n_data, (k + 1) * n_data)),
        )
        for k in range(n_blocks)
    )
    return CircuitSpec(num_data_qubits=n_data, readout_prep=readout_prep, blocks=blocks)


def check_params(spec: CircuitSpec, params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (spec.param_count,):
        raise ShapeError(f"expected {spec.param_count} parameters, got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValueError("parameter vector contains non-finite entries")
    return params


def bind(spec: CircuitSpec, params: np.ndarray) -> list[tuple[np.ndarray, tuple[int, int]]]:
    """Concrete (gate matrix, (data qubit, readout qubit)) list in execution order."""
    params = check_params(spec, params)
    readout = spec.num_data_qubits
    gates = []
    for block in spec.blocks:
        for j, offset in enumerate(block.param_offsets):
            gates.append((ising(block.axis, params[offset]), (j, readout)))
    return gates


def evaluate(spec: CircuitSpec, params: np.ndarray, input_state: Statevector) -> float:
    """Readout expectation of the circuit applied to an encoded input state.

    Appends the readout qubit in its prepared state, applies every block
    gate in order, and measures Z on the readout. Deterministic; the result
    is in [-1, 1].
    """
    if input_state.num_qubits != spec.num_data_qubits:
        raise ShapeError(
            f"input state has {input_state.num_qubits} qubits, circuit expects {spec.num_data_qubits}"
        )
    state = append_qubit(input_state, np.array([1.0, 0.0]))
    readout = spec.num_data_qubits
    if spec.readout_prep is ReadoutPrep.PLUS_STATE:
        apply_single(state, hadamard(), readout, validate=False)
    for gate, (qa, qb) in bind(spec, params):
        apply_two(state, gate, qa, qb, validate=False)
    return expectation_z(state, readout)
