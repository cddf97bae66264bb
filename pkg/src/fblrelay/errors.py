"""Exception and warning types shared across the package."""


class FblRelayError(Exception):
    """Base class for all package errors."""


class DomainError(FblRelayError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ConvergenceError(FblRelayError, ArithmeticError):
    """A series, continued fraction or quadrature failed to reach its tolerance."""


class UnboundedDelayError(DomainError):
    """The requested reliability cannot be met with any finite blocklength."""


class ConfigError(FblRelayError):
    """A scenario configuration is malformed; ``field`` names the offending path."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ShortBlocklengthWarning(UserWarning):
    """Blocklength below the range where the normal approximation is trustworthy."""
