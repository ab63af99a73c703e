"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A register or device does not have enough qubits for the request."""


class ShapeError(ValueError):
    """Dimensions of an argument do not match what the operation expects."""


class PartitionError(ValueError):
    """No feasible assignment of image pixels to device segments exists."""


class FormatError(ValueError):
    """A data file violates its container format.

    Carries the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(ValueError):
    """A configuration value is invalid. Carries the field path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class CheckpointError(ValueError):
    """A checkpoint file is unreadable, tampered with, or incompatible."""
