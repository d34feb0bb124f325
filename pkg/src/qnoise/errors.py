"""Exceptions raised by the lab, each mapped to a CLI exit code."""


class LabError(Exception):
    """Base class for all errors raised by qnoise."""

    exit_code = 1


class ConfigError(LabError):
    """An experiment config could not be parsed or validated."""

    exit_code = 2


class ConvergenceError(LabError):
    """Quadrature did not reach the requested tolerance."""

    exit_code = 3

    def __init__(self, msg: str, achieved: float) -> None:
        """Initialize with the error estimate actually reached."""
        super().__init__(msg)
        self.achieved = achieved


class DomainError(LabError, ValueError):
    """An input lies outside the model, e.g. diagonal noise past the Bohr energy."""

    exit_code = 4


class InsufficientOscillationError(LabError):
    """A series has too few local maxima to extract an envelope."""

    exit_code = 4


class FloorReachedError(LabError):
    """Deviations sank into the quadrature noise floor inside the fit window."""

    exit_code = 3

    def __init__(self, msg: str, usable_window: tuple[float, float] | None) -> None:
        """Initialize with the sub-window that is still above the floor."""
        super().__init__(msg)
        self.usable_window = usable_window


class SamplingError(LabError):
    """An inverse-CDF table failed its self-test at maximum refinement."""

    exit_code = 3
