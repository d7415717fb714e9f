"""Exception hierarchy shared by the library and the command line tool."""


class TcqError(Exception):
    """Base class for every error raised by this package."""


class ContractError(TcqError, ValueError):
    """An argument violated an operation's precondition."""


class DegenerateGeometryError(TcqError, ArithmeticError):
    """The user set is (numerically) linearly dependent, so ZF is undefined."""

    def __init__(self, message, users=None):
        super().__init__(message)
        self.users = tuple(users) if users is not None else ()


class TraceFormatError(TcqError, ValueError):
    """A channel trace file could not be parsed."""

    def __init__(self, message, record=None):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)
        self.record = record


class ConfigError(TcqError, ValueError):
    """An experiment configuration is invalid."""
