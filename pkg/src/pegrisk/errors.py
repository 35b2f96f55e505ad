"""Exception hierarchy.

Everything raised on bad data or an unusable model derives from
:class:`PegRiskError`, which the command line maps to exit code 1.
"""


class PegRiskError(Exception):
    """Base class for data and model errors."""


class InvalidArgumentError(PegRiskError, ValueError):
    pass


class InsufficientDataError(PegRiskError, ValueError):
    pass


class RankDeficientError(PegRiskError, ValueError):
    pass


class NotPositiveDefiniteError(PegRiskError, ValueError):
    pass


class UndefinedCorrelationError(PegRiskError, ValueError):
    pass


class DegenerateDistributionError(PegRiskError, ValueError):
    pass


class NoCointegrationError(PegRiskError):
    """Johansen selected rank 0 and no cointegrating vector was supplied."""


class ConfigError(PegRiskError, ValueError):
    pass


class DataFormatError(PegRiskError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
