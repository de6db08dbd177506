"""Exception hierarchy.  All errors are ``ValueError`` subclasses."""


class SparseWTAError(ValueError):
    pass


class InvalidArgument(SparseWTAError):
    """Shapes, sizes or parameters that violate an operation's preconditions."""


class InvalidInput(SparseWTAError):
    """Data that cannot be ingested, e.g. NaN or infinite entries."""


class FormatError(SparseWTAError):
    """Malformed file; ``offset`` is the byte (or line) where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(SparseWTAError):
    """Run configuration that fails validation; ``path`` names the field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DataError(SparseWTAError):
    """Data that is well-formed but inconsistent with the model or with other inputs."""
