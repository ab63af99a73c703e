import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqnn.encoding import (
    FEATURE_ANGLE_SLOPE,
    AngleEncodingConfig,
    amplitude_encode,
    angle_encode,
    basis_encode,
    feature_to_angle,
    state_from_angles,
)
from sqnn.errors import ShapeError
from sqnn.gates import Axis


class TestAngleEncode:
    def test_zeros_give_ground_state(self):
        state = angle_encode(np.zeros(3))
        expected = np.zeros(8)
        expected[0] = 1.0
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)

    def test_full_scale_single_entry(self):
        state = angle_encode(np.array([1.0]), AngleEncodingConfig(axis=Axis.X, scale=math.pi))
        np.testing.assert_allclose(state.amplitudes, [0, -1j], atol=1e-15)

    def test_two_entry_tensor_product(self):
        # independent closed form: per-qubit (cos(a/2), -i sin(a/2)) then kron
        x = np.array([0.5, 0.25])
        a = math.pi * x
        q0 = np.array([math.cos(a[0] / 2), -1j * math.sin(a[0] / 2)])
        q1 = np.array([math.cos(a[1] / 2), -1j * math.sin(a[1] / 2)])
        state = angle_encode(x)
        np.testing.assert_allclose(state.amplitudes, np.kron(q0, q1), atol=1e-15)

    def test_norm_is_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            state = angle_encode(rng.uniform(0, 1, size=rng.integers(1, 6)))
            assert abs(state.norm() - 1.0) < 1e-12

    def test_injective_on_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            x = rng.uniform(0, 1, 4)
            y = rng.uniform(0, 1, 4)
            if np.allclose(x, y):
                continue
            fid = abs(np.vdot(angle_encode(x).amplitudes, angle_encode(y).amplitudes))
            assert fid < 1.0 - 1e-12

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            angle_encode(np.array([0.5, math.nan]))

    def test_scale_validated(self):
        with pytest.raises(ValueError):
            AngleEncodingConfig(scale=0.0)
        with pytest.raises(ValueError):
            AngleEncodingConfig(scale=7.0)

    @pytest.mark.parametrize("axis", [Axis.X, Axis.Y, Axis.Z])
    def test_state_from_angles_norm(self, axis):
        state = state_from_angles(np.array([0.3, 2.2, 4.0]), axis)
        assert abs(state.norm() - 1.0) < 1e-12


class TestBasisEncode:
    def test_reference_example(self):
        state = basis_encode(np.array([0.3, 0.6, 0.2, 0.8]), 0.5)
        expected = np.zeros(16)
        expected[0b0101] = 1.0
        np.testing.assert_array_equal(state.amplitudes, expected)

    def test_all_zero(self):
        state = basis_encode(np.array([0.0, 0.0]), 0.5)
        np.testing.assert_array_equal(state.amplitudes, [1, 0, 0, 0])

    def test_threshold_inclusive(self):
        state = basis_encode(np.array([0.5]), 0.5)
        np.testing.assert_array_equal(state.amplitudes, [0, 1])

    def test_single_unit_amplitude(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            state = basis_encode(rng.uniform(0, 1, 5), 0.5)
            nonzero = np.flatnonzero(state.amplitudes)
            assert nonzero.size == 1
            assert state.amplitudes[nonzero[0]] == 1.0


class TestAmplitudeEncode:
    def test_basis_vector(self):
        state = amplitude_encode(np.array([1.0, 0.0, 0.0, 0.0]))
        np.testing.assert_array_equal(state.amplitudes, [1, 0, 0, 0])
        assert state.num_qubits == 2

    def test_uniform(self):
        state = amplitude_encode(np.ones(4))
        np.testing.assert_allclose(state.amplitudes, [0.5] * 4, atol=1e-15)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            amplitude_encode(np.zeros(2))

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ShapeError):
            amplitude_encode(np.ones(3))

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 100.0))
    def test_scale_invariance(self, c):
        x = np.array([0.3, -1.2, 0.0, 2.2])
        np.testing.assert_allclose(
            amplitude_encode(c * x).amplitudes, amplitude_encode(x).amplitudes, atol=1e-12
        )


class TestFeatureToAngle:
    def test_endpoints_and_midpoint(self):
        assert feature_to_angle(-1.0) == pytest.approx(0.0)
        assert feature_to_angle(1.0) == pytest.approx(math.pi)
        assert feature_to_angle(0.0) == pytest.approx(math.pi / 2)

    def test_clamps_float_noise(self):
        assert feature_to_angle(1.0 + 5e-10) == pytest.approx(math.pi)
        assert feature_to_angle(-1.0 - 5e-10) == pytest.approx(0.0)

    def test_slope_constant(self):
        f = 0.37
        eps = 1e-6
        numeric = (feature_to_angle(f + eps) - feature_to_angle(f - eps)) / (2 * eps)
        assert numeric == pytest.approx(FEATURE_ANGLE_SLOPE, abs=1e-9)
