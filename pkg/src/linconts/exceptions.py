class LinContsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LinContsError, ValueError):
    """Malformed arm parameters, thresholds or other arguments."""


class InfeasibleError(LinContsError):
    """No arm mixture can meet the reward-event constraint."""


class DegeneracyError(LinContsError):
    """Optimal support arms share a mean, so the duals are not unique."""


class DomainError(LinContsError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ThresholdRangeError(LinContsError):
    """Analysis thresholds fall outside their admissible range.

    ``arms`` lists the offending arm indices when the failure is per arm.
    """

    def __init__(self, message: str, arms=()):
        super().__init__(message)
        self.arms = tuple(arms)


class CsvFormatError(LinContsError, ValueError):
    """An arm CSV file violates the ``arm_id,mu,r`` schema."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row
