"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class ResourceError(RuntimeError):
    """A computation would exceed its memory or enumeration budget."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ChecksumError(RuntimeError):
    """A cache file failed its integrity check."""

    def __init__(self, path, message="checksum mismatch"):
        super().__init__(f"{path}: {message}")
        self.path = path
