"""Scalable quantum neural networks on a statevector simulator.

Partition a classical input across simulated small quantum devices acting
as feature extractors, fuse their measured features on a quantum predictor,
and train every circuit parameter end-to-end with parameter-shift gradients.
"""

from .encoding import AngleEncodingConfig, amplitude_encode, angle_encode, basis_encode, feature_to_angle
from .estimator import SqnnClassifier
from .gates import Axis, hadamard, ising, pauli, rotation
from .gradients import finite_diff_grad, full_gradient, input_grad, param_shift_grad
from .orchestrator import (
    DeviceSpec,
    PartitionPlan,
    Role,
    SingleDeviceModel,
    SqnnModel,
    Strategy,
    backward,
    build_single_device_model,
    build_sqnn_model,
    extract_features,
    forward,
    make_partition,
    predict,
    run_sequential,
)
from .statevector import Statevector, apply_single, apply_two, expectation_z, new_zero_state
from .training import TrainConfig, evaluate_accuracy, loss, sgd_step, train, train_batch
from .vqc import Block, CircuitSpec, ReadoutPrep, bind, build_basic_model, evaluate

__version__ = "0.1.0"

__all__ = [
    "AngleEncodingConfig",
    "Axis",
    "Block",
    "CircuitSpec",
    "DeviceSpec",
    "PartitionPlan",
    "ReadoutPrep",
    "Role",
    "SingleDeviceModel",
    "SqnnClassifier",
    "SqnnModel",
    "Statevector",
    "Strategy",
    "TrainConfig",
    "amplitude_encode",
    "angle_encode",
    "apply_single",
    "apply_two",
    "backward",
    "basis_encode",
    "bind",
    "build_basic_model",
    "build_single_device_model",
    "build_sqnn_model",
    "evaluate",
    "evaluate_accuracy",
    "expectation_z",
    "extract_features",
    "feature_to_angle",
    "finite_diff_grad",
    "forward",
    "full_gradient",
    "hadamard",
    "input_grad",
    "ising",
    "loss",
    "make_partition",
    "new_zero_state",
    "param_shift_grad",
    "pauli",
    "predict",
    "rotation",
    "run_sequential",
    "sgd_step",
    "train",
    "train_batch",
]
