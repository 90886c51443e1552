"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An input parameter violates its documented domain.

    ``param`` names the offending parameter so front ends can point at the
    exact flag or field that was rejected.
    """

    def __init__(self, param: str, message: str):
        super().__init__(message)
        self.param = param


class ResourceLimitError(RuntimeError):
    """A request exceeds a configured resource cap (e.g. trial budget)."""
