"""Shared exception types."""


class NumericError(RuntimeError):
    """Numerical procedure failed to converge or produced an invalid result.

    Raised for root-bracketing failures, singular collocation systems,
    eigensolver breakdowns and similar conditions. The CLI maps this to
    exit code 3.
    """


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
