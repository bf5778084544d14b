"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a structural precondition."""


class CapacityError(RuntimeError):
    """Raised when a request exceeds a documented enumeration or size cap."""
