"""Exception hierarchy.

Configuration problems (bad parameters, incompatible flag combinations) and
data problems (unparseable or invalid files) are kept apart so the CLI can map
them onto distinct exit codes.
"""


class LofsError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(LofsError, ValueError):
    """Invalid parameter value or incompatible combination of options."""


class DataError(LofsError, ValueError):
    """Input data cannot be used."""


class ParseError(DataError):
    """A file could not be parsed. ``row`` is 1-based when known."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ValidationError(DataError):
    """Parsed data violates a dataset invariant."""


class UnsupportedFormatError(DataError):
    """Valid input using a feature of the format that is not supported."""


class StreamingViolation(LofsError, RuntimeError):
    """A selector tried to read a feature the stream has not revealed yet."""

    def __init__(self, index):
        super().__init__(f"feature {index} has not been revealed by the stream")
        self.index = index


class IncompleteDesignError(ConfigurationError):
    """A comparison is missing (dataset, algorithm) cells."""

    def __init__(self, missing):
        self.missing = list(missing)
        cells = ", ".join(f"({d}, {a})" for d, a in self.missing)
        super().__init__(f"incomplete block design, missing cells: {cells}")


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given input (e.g. AUC with one class)."""


class KindError(ConfigurationError, TypeError):
    """A measure was given a variable of the wrong kind (discrete/continuous)."""
