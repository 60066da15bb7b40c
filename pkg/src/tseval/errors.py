"""Exception types shared across the package."""


class TsevalError(Exception):
    """Base class for all errors raised deliberately by this package."""


class DataFormatError(TsevalError):
    """A dataset or resource file violates its documented format."""


class ResourceMissingError(TsevalError):
    """A requested feature needs a resource that was not loaded."""

    def __init__(self, feature: str, resource: str):
        self.feature = feature
        self.resource = resource
        super().__init__(
            f"feature {feature!r} requires the {resource!r} resource, "
            f"which is not loaded"
        )


class DegenerateDataError(TsevalError):
    """Input data is too degenerate for the requested computation
    (zero variance, a single class, a singular system, ...)."""
