"""Exception hierarchy shared by all modules."""


class FioLabError(Exception):
    """Base class for every error raised by fiolab."""


class ConfigurationError(FioLabError, ValueError):
    """Invalid construction parameters (grid sizes, partition depth, ...)."""


class UsageError(FioLabError, ValueError):
    """An operation was called on data of the wrong kind (e.g. wrong field side)."""


class CapabilityError(FioLabError):
    """The requested quantity is not available for this object (e.g. x-derivatives of a rough symbol)."""


class DomainError(FioLabError, ValueError):
    """Evaluation point outside the domain where the object is defined."""


class PreconditionError(FioLabError, ValueError):
    """A numerical precondition of an experiment does not hold."""
