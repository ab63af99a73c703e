"""Cross-engine checks: the branch-expansion evaluator must reproduce the
statevector engine's values to machine precision for every circuit shape."""

import numpy as np
import pytest

import sqnn.fastsim as fastsim
from conftest import random_basic_circuit
from sqnn.encoding import state_from_angles
from sqnn.errors import ShapeError
from sqnn.fastsim import StarCircuit, expectations, input_shift_table, param_shift_table
from sqnn.gates import Axis
from sqnn.gradients import full_gradient, input_grad
from sqnn.vqc import Block, CircuitSpec, ReadoutPrep, build_basic_model, evaluate


class TestExpectations:
    def test_matches_statevector_engine(self):
        rng = np.random.default_rng(101)
        worst = 0.0
        for _ in range(60):
            spec, params, angles = random_basic_circuit(rng, max_data=5, max_blocks=3)
            fast = expectations(StarCircuit.from_spec(spec), params, angles[None, :])[0]
            slow = evaluate(spec, params, state_from_angles(angles))
            worst = max(worst, abs(fast - slow))
        assert worst < 1e-12

    @pytest.mark.parametrize("axis", [Axis.X, Axis.Y, Axis.Z])
    @pytest.mark.parametrize("prep", [ReadoutPrep.ZERO_STATE, ReadoutPrep.PLUS_STATE])
    def test_every_axis_and_prep(self, axis, prep):
        rng = np.random.default_rng(103)
        spec = build_basic_model(3, 2, (axis,), prep)
        params = rng.uniform(-np.pi, np.pi, 6)
        angles = rng.uniform(0, np.pi, 3)
        fast = expectations(StarCircuit.from_spec(spec), params, angles[None, :])[0]
        assert fast == pytest.approx(evaluate(spec, params, state_from_angles(angles)), abs=1e-13)

    @pytest.mark.parametrize("enc_axis", [Axis.X, Axis.Y, Axis.Z])
    def test_encoding_axes(self, enc_axis):
        rng = np.random.default_rng(107)
        spec = build_basic_model(2, 2)
        params = rng.uniform(-np.pi, np.pi, 4)
        angles = rng.uniform(0, np.pi, 2)
        fast = expectations(StarCircuit.from_spec(spec), params, angles[None, :], enc_axis)[0]
        assert fast == pytest.approx(evaluate(spec, params, state_from_angles(angles, enc_axis)), abs=1e-13)

    def test_batched_rows_bitwise_equal_single_rows(self):
        rng = np.random.default_rng(109)
        spec, params, _ = random_basic_circuit(rng, max_data=4, max_blocks=3)
        star = StarCircuit.from_spec(spec)
        angles = rng.uniform(0, np.pi, (7, spec.num_data_qubits))
        batched = expectations(star, params, angles)
        single = np.array([expectations(star, params, row[None, :])[0] for row in angles])
        assert np.array_equal(batched, single)

    def test_chunking_does_not_change_bits(self, monkeypatch):
        rng = np.random.default_rng(113)
        spec, params, _ = random_basic_circuit(rng, max_data=4, max_blocks=3)
        star = StarCircuit.from_spec(spec)
        angles = rng.uniform(0, np.pi, (11, spec.num_data_qubits))
        full = expectations(star, params, angles)
        monkeypatch.setattr(fastsim, "_MAX_CHUNK_ELEMENTS", 1)
        chunked = expectations(star, params, angles)
        assert np.array_equal(full, chunked)

    def test_rejects_non_block_major_layout(self):
        spec = CircuitSpec(
            num_data_qubits=2,
            readout_prep=ReadoutPrep.PLUS_STATE,
            blocks=(Block(Axis.X, (1, 0)),),
        )
        with pytest.raises(ValueError):
            StarCircuit.from_spec(spec)

    def test_shape_errors(self):
        star = StarCircuit.from_spec(build_basic_model(2, 1))
        with pytest.raises(ShapeError):
            expectations(star, np.zeros(3), np.zeros((1, 2)))
        with pytest.raises(ShapeError):
            expectations(star, np.zeros(2), np.zeros((1, 3)))


class TestShiftTables:
    def test_param_table_matches_statevector_shift_rule(self):
        rng = np.random.default_rng(127)
        for _ in range(12):
            spec, params, angles = random_basic_circuit(rng, max_data=4, max_blocks=3)
            table = param_shift_table(StarCircuit.from_spec(spec), params, angles[None, :])[0]
            reference = full_gradient(spec, params, state_from_angles(angles))
            np.testing.assert_allclose(table, reference, atol=1e-12)

    def test_input_table_matches_statevector_shift_rule(self):
        rng = np.random.default_rng(131)
        for _ in range(12):
            spec, params, angles = random_basic_circuit(rng, max_data=4, max_blocks=3)
            table = input_shift_table(StarCircuit.from_spec(spec), params, angles[None, :])[0]
            reference = [input_grad(spec, params, angles, i) for i in range(angles.size)]
            np.testing.assert_allclose(table, reference, atol=1e-12)

    def test_tables_batch_bitwise_consistent(self):
        rng = np.random.default_rng(137)
        spec, params, _ = random_basic_circuit(rng, max_data=3, max_blocks=2)
        star = StarCircuit.from_spec(spec)
        angles = rng.uniform(0, np.pi, (5, spec.num_data_qubits))
        batched = param_shift_table(star, params, angles)
        rows = np.stack([param_shift_table(star, params, row[None, :])[0] for row in angles])
        assert np.array_equal(batched, rows)

    def test_extreme_angle_ranges(self):
        # parameters far outside [-pi, pi] and negative encoding angles
        rng = np.random.default_rng(149)
        for _ in range(24):
            n = int(rng.integers(1, 5))
            B = int(rng.integers(1, 5))
            axes = tuple(rng.choice([Axis.X, Axis.Y, Axis.Z]) for _ in range(B))
            prep = ReadoutPrep.PLUS_STATE if rng.random() < 0.5 else ReadoutPrep.ZERO_STATE
            enc = rng.choice([Axis.X, Axis.Y, Axis.Z])
            spec = build_basic_model(n, B, axes, prep)
            params = rng.uniform(-4 * np.pi, 4 * np.pi, spec.param_count)
            angles = rng.uniform(-2 * np.pi, 2 * np.pi, n)
            fast = expectations(StarCircuit.from_spec(spec), params, angles[None, :], enc)[0]
            slow = evaluate(spec, params, state_from_angles(angles, enc))
            assert fast == pytest.approx(slow, abs=1e-12)

    def test_six_block_circuit(self):
        # 64 branches: exercises the deeper expansion used by 6-block models
        rng = np.random.default_rng(139)
        spec = build_basic_model(2, 6)
        params = rng.uniform(-np.pi, np.pi, 12)
        angles = rng.uniform(0, np.pi, 2)
        fast = expectations(StarCircuit.from_spec(spec), params, angles[None, :])[0]
        assert fast == pytest.approx(evaluate(spec, params, state_from_angles(angles)), abs=1e-12)
        table = param_shift_table(StarCircuit.from_spec(spec), params, angles[None, :])[0]
        np.testing.assert_allclose(table, full_gradient(spec, params, state_from_angles(angles)), atol=1e-12)
