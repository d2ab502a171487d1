"""Exception hierarchy shared by all cloneforge modules."""


class CloneforgeError(Exception):
    pass


class EncodingError(CloneforgeError, ValueError):
    """A tuple component or index lies outside its radix range."""


class ArityError(CloneforgeError, ValueError):
    pass


class CarrierMismatchError(CloneforgeError, ValueError):
    pass


class SignatureMismatchError(CloneforgeError, ValueError):
    pass


class PreconditionError(CloneforgeError, ValueError):
    pass


class ResourceLimitError(CloneforgeError):
    """A request would exceed a configured size limit.

    ``partial`` carries whatever was computed before the limit was hit
    (for clone closures this is the member set found so far).
    """

    def __init__(self, message, limit=None, partial=None):
        super().__init__(message)
        self.limit = limit
        self.partial = partial


class IncompleteError(CloneforgeError):
    """A result would only be a bound because an enumeration was truncated."""


class ParseError(CloneforgeError, ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset
