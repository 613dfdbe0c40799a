from typing import Optional


class CmbpError(Exception):
    """Base class for every error raised by the planner"""


class UsageError(CmbpError, ValueError):
    """An API was called with arguments it does not accept"""


class ConfigError(UsageError):
    pass


class UnsupportedOperationError(UsageError):
    pass


class ContractError(CmbpError):
    """A nonemptiness requirement on initial states, goals or belief states was violated"""


class ResourceError(CmbpError):
    def __init__(self, message: str, level: Optional[int] = None):
        if level is not None:
            message = f"{message} (at search level {level})"
        super().__init__(message)
        self.level = level


class OracleBoundExceeded(ResourceError):
    pass


class InternalInvariantError(CmbpError, AssertionError):
    pass


class UnknownInstanceError(CmbpError, LookupError):
    pass


class DomainLanguageError(CmbpError):
    """Error in a domain description. Carries the span of the offending text when known"""

    def __init__(self, message: str, span=None):
        self.message = message
        self.span = span
        if span is not None:
            message = f"line {span.line}, column {span.column}: {message}"
        super().__init__(message)


class ParseError(DomainLanguageError):
    pass


class DomainValidationError(DomainLanguageError):
    pass
