"""Exception hierarchy shared by all graphcsp modules."""


class GraphCSPError(Exception):
    """Base class for every error raised by graphcsp."""


class InvalidFamily(GraphCSPError, ValueError):
    pass


class ArityTooLarge(GraphCSPError, ValueError):
    pass


class ArityMismatch(GraphCSPError, ValueError):
    pass


class IndexOutOfRange(GraphCSPError, IndexError):
    pass


class IncoherentSpec(GraphCSPError, ValueError):
    pass


class ParseError(GraphCSPError, ValueError):
    """Malformed document or orbit string; ``location`` points at the offending part."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class SchemaError(GraphCSPError, ValueError):
    """Well-formed document that violates the instance schema."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class NotSimple(GraphCSPError):
    pass


class NotMinimal(GraphCSPError):
    pass


class TooManyVariables(GraphCSPError):
    pass


class TooFewVariables(GraphCSPError):
    pass


class NotRealizable(GraphCSPError):
    pass


class MinimalityMismatch(GraphCSPError):
    pass


class MTooSmall(GraphCSPError, ValueError):
    pass


class TooLarge(GraphCSPError):
    pass
