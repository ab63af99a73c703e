"""Shared fixtures and independent oracles.

The dense-matrix helpers here rebuild gates and circuit unitaries from
scratch (explicit cos/sin/kron and bit arithmetic) so that statevector
gate application is checked against a fully independent path.
"""
from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np
import pytest

from sqnn.dataset import resolve_data_dir
from sqnn.gates import Axis
from sqnn.vqc import CircuitSpec, ReadoutPrep

# --- independent dense-matrix oracle -------------------------------------

PAULI = {
    Axis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def oracle_rotation(axis: Axis, theta: float) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * PAULI[axis]


def oracle_ising(axis: Axis, theta: float) -> np.ndarray:
    pp = np.kron(PAULI[axis], PAULI[axis])
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * pp


def embed_one(gate: np.ndarray, q: int, nq: int) -> np.ndarray:
    """Expand a 2x2 gate to the full register by bit arithmetic (qubit 0 = MSB)."""
    dim = 1 << nq
    pos = nq - 1 - q
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bit = (col >> pos) & 1
        base = col & ~(1 << pos)
        for row_bit in range(2):
            full[base | (row_bit << pos), col] += gate[row_bit, bit]
    return full


def embed_two(gate: np.ndarray, qa: int, qb: int, nq: int) -> np.ndarray:
    """Expand a 4x4 gate on (qa, qb) to the full register, qa's bit major."""
    dim = 1 << nq
    pa, pb = nq - 1 - qa, nq - 1 - qb
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        gcol = 2 * ((col >> pa) & 1) + ((col >> pb) & 1)
        base = col & ~(1 << pa) & ~(1 << pb)
        for grow in range(4):
            row = base | ((grow >> 1) << pa) | ((grow & 1) << pb)
            full[row, col] += gate[grow, gcol]
    return full


def dense_circuit_unitary(spec: CircuitSpec, params: np.ndarray) -> np.ndarray:
    """Full unitary of the circuit (including readout prep) by matrix products."""
    nq = spec.num_data_qubits + 1
    readout = spec.num_data_qubits
    u = np.eye(1 << nq, dtype=complex)
    if spec.readout_prep is ReadoutPrep.PLUS_STATE:
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        u = embed_one(h, readout, nq) @ u
    params = np.asarray(params, dtype=float)
    for k, block in enumerate(spec.blocks):
        for j, offset in enumerate(block.param_offsets):
            u = embed_two(oracle_ising(block.axis, params[offset]), j, readout, nq) @ u
    return u


def dense_evaluate(spec: CircuitSpec, params: np.ndarray, input_amps: np.ndarray) -> float:
    """Circuit expectation through the dense full-matrix route."""
    nq = spec.num_data_qubits + 1
    psi0 = np.kron(np.asarray(input_amps, dtype=complex), np.array([1, 0], dtype=complex))
    psi = dense_circuit_unitary(spec, params) @ psi0
    z_full = embed_one(PAULI[Axis.Z], spec.num_data_qubits, nq)
    return float((psi.conj() @ z_full @ psi).real)


def random_basic_circuit(rng: np.random.Generator, max_data: int = 4, max_blocks: int = 3):
    """Random circuit + parameters + encoding angles for oracle comparisons."""
    from sqnn.vqc import build_basic_model

    n = int(rng.integers(1, max_data + 1))
    blocks = int(rng.integers(1, max_blocks + 1))
    axes = tuple(rng.choice([Axis.X, Axis.Y, Axis.Z]) for _ in range(blocks))
    prep = ReadoutPrep.PLUS_STATE if rng.random() < 0.5 else ReadoutPrep.ZERO_STATE
    spec = build_basic_model(n, blocks, axes, prep)
    params = rng.uniform(-np.pi, np.pi, spec.param_count)
    angles = rng.uniform(0.0, np.pi, n)
    return spec, params, angles


# --- dataset fixtures -----------------------------------------------------


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    """Directory with the real IDX files, or skip the test."""
    data_dir = resolve_data_dir(None)
    if not data_dir.is_absolute():
        data_dir = Path(__file__).resolve().parent.parent / data_dir
    probe = data_dir / "train-labels-idx1-ubyte"
    if not probe.exists() and not probe.with_suffix(".gz").exists():
        pytest.skip(f"MNIST IDX files not found under {data_dir} (set SQNN_DATA_DIR)")
    return data_dir


def write_idx_pair(
    directory: Path,
    images: np.ndarray,
    labels: np.ndarray,
    prefix: str = "train",
    compress: bool = False,
) -> tuple[Path, Path]:
    """Write (N, h, w) uint8 images and (N,) uint8 labels as IDX files."""
    n, h, w = images.shape
    stem = {"train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
            "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")}[prefix]
    img_bytes = struct.pack(">IIII", 0x803, n, h, w) + images.astype(np.uint8).tobytes()
    lbl_bytes = struct.pack(">II", 0x801, n) + labels.astype(np.uint8).tobytes()
    suffix = ".gz" if compress else ""
    img_path = directory / (stem[0] + suffix)
    lbl_path = directory / (stem[1] + suffix)
    img_path.write_bytes(gzip.compress(img_bytes) if compress else img_bytes)
    lbl_path.write_bytes(gzip.compress(lbl_bytes) if compress else lbl_bytes)
    return img_path, lbl_path


def synthetic_digit_images(rng: np.random.Generator, n: int, size: int = 28) -> tuple[np.ndarray, np.ndarray]:
    """Crude two-class 'digit' images labeled 3 and 6, separable by layout.

    Class 3 puts bright mass on the right half, class 6 a loop lower-left;
    enough structure for smoke-training without pretending to be MNIST.
    """
    images = np.zeros((n, size, size), dtype=np.uint8)
    labels = np.empty(n, dtype=np.uint8)
    half = size // 2
    for i in range(n):
        digit = 3 if rng.random() < 0.5 else 6
        canvas = rng.uniform(0, 40, size=(size, size))
        if digit == 3:
            canvas[4 : size - 4, half:] += rng.uniform(120, 200)
        else:
            canvas[half:, : half + 2] += rng.uniform(120, 200)
        images[i] = np.clip(canvas, 0, 255).astype(np.uint8)
        labels[i] = digit
    return images, labels


@pytest.fixture()
def synthetic_data_dir(tmp_path: Path) -> Path:
    rng = np.random.default_rng(1234)
    train_images, train_labels = synthetic_digit_images(rng, 80)
    test_images, test_labels = synthetic_digit_images(rng, 40)
    write_idx_pair(tmp_path, train_images, train_labels, "train")
    write_idx_pair(tmp_path, test_images, test_labels, "test")
    return tmp_path
