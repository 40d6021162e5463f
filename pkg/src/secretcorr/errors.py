"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ValidationError(DomainError):
    """Malformed input: bad fractions, broken normalization, bad file contents."""


class PreconditionError(DomainError):
    """A mathematical precondition (e.g. Omega_s >= Omega_0) does not hold.

    ``detail`` carries the violated inequality in human readable form.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class EmptyFilterError(DomainError):
    """Filtering discarded every event with positive probability."""


class ResourceError(RuntimeError):
    """An enumeration or optimization budget was exceeded."""
