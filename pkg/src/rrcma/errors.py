"""Exception hierarchy shared across the package."""


class RRCMAError(Exception):
    """Base class for all package errors."""


class NumericalError(RRCMAError, ArithmeticError):
    pass


class DimensionError(RRCMAError, ValueError):
    pass


class DomainError(RRCMAError, ValueError):
    pass


class ConfigError(RRCMAError, ValueError):
    """Invalid configuration. ``field`` names the offending setting when known."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class EvaluationError(RRCMAError, ValueError):
    pass


class ReportError(RRCMAError):
    pass


class IoError(RRCMAError, OSError):
    pass
