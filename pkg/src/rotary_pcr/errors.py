"""Exception hierarchy shared by all modules."""


class RotaryPCRError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(RotaryPCRError, ValueError):
    """Invalid plant, schedule or scenario parameters."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StepSizeError(RotaryPCRError, ValueError):
    pass


class SingularSystemError(RotaryPCRError, ArithmeticError):
    pass


class CalibrationError(RotaryPCRError, ValueError):
    pass


class SignalError(RotaryPCRError, ValueError):
    pass


class TuningError(RotaryPCRError):
    pass


class DomainError(RotaryPCRError, ValueError):
    pass


class CoverageError(RotaryPCRError, ValueError):
    pass


class GeometryError(RotaryPCRError, ValueError):
    pass


class SelfTerminatedEtchError(GeometryError):
    """The sloped sidewalls meet before the requested depth is reached."""
