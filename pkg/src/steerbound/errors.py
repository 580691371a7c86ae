"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class UnsupportedDimensionError(InvalidInputError):
    """Raised when a construction is not available for the requested dimension."""


class CapacityError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""

    def __init__(self, message: str, required: int, limit: int):
        super().__init__(message)
        self.required = required
        self.limit = limit
