"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: configuration problems exit 2,
I/O problems exit 3, numeric divergence exits 4.
"""


class CgpoError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CgpoError):
    """Invalid or inconsistent configuration."""


class UnknownCharacter(CgpoError):
    """Text contains a character outside the tokenizer vocabulary."""

    def __init__(self, char: str, position: int):
        super().__init__(f"unknown character {char!r} at position {position}")
        self.char = char
        self.position = position


class ContextOverflow(CgpoError):
    """Token sequence does not fit the model context window."""


class EmptySegment(CgpoError):
    """A nonempty token segment was required."""


class EmptyCalibrationSet(CgpoError):
    """Threshold calibration needs at least one confidence value."""


class FingerprintMismatch(CgpoError):
    """Checkpoint tokenizer fingerprint does not match the active tokenizer."""


class CorruptCheckpoint(CgpoError):
    """Checkpoint file is unreadable or fails validation."""


class DivergenceDetected(CgpoError):
    """Training loss became non-finite."""


class IoFailure(CgpoError):
    """Filesystem operation failed."""
