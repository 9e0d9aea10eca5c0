from __future__ import annotations


class QrngError(Exception):
    """
    Base class for every error raised by the post-processing chain.

    The CLI maps anything deriving from this to exit code 2.
    """


class ConfigError(QrngError, ValueError):
    """Invalid or unresolvable pipeline configuration."""


class InputError(QrngError):
    """Input file missing or unreadable."""


class TraceFormatError(QrngError, ValueError):
    """Malformed trace file: bad header, truncated payload or out-of-range codes."""


class DspError(QrngError, ValueError):
    """Invalid filter design request or input unsuitable for conditioning."""


class CalibrationError(QrngError, ValueError):
    """Calibration data cannot produce a valid vacuum-unit conversion."""


class NoCertifiableRandomness(CalibrationError):
    """
    The resolution product delta_p * delta_q reaches pi, so the min-entropy
    bound certifies zero bits.
    """

    def __init__(self, message: str = "no certifiable randomness") -> None:
        super().__init__(message)


class ExtractorError(QrngError, ValueError):
    """Dimension or seed mismatch in Toeplitz extraction."""


class InfeasibleDimensions(ExtractorError):
    """
    No output length m satisfies both the ratio condition and the target
    security exponent.
    """

    def __init__(self, message: str, *, max_eps_exp: float) -> None:
        super().__init__(message)
        self.max_eps_exp = max_eps_exp


class InsufficientDataError(QrngError, ValueError):
    """Not enough samples or bits for the requested operation."""


class StageError(QrngError):
    """
    Wraps a failure inside a pipeline stage so diagnostics name the stage.
    """

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
