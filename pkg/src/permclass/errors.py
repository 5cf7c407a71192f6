"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed permutation, tree, pattern or specification."""


class ClassMembershipError(ValueError):
    """A permutation has a simple decoration outside the class."""


class CriticalityError(ValueError):
    """The class is not standard critical, so the limit quantities do not apply."""


class NeedsLargerCutoffError(RuntimeError):
    """Folded offspring tail mass exceeds the declared tolerance."""


class RetryLimitError(RuntimeError):
    """A rejection sampler exceeded its retry budget."""


class InsufficientRealizationError(RuntimeError):
    """A finite realization of a limit object cannot certify the requested window."""


class ResourceLimitError(RuntimeError):
    """A requested size exceeds a configured resource bound."""
