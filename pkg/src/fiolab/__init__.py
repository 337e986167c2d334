"""fiolab: a numerical laboratory for Fourier integral operators."""

from .errors import (CapabilityError, ConfigurationError, DomainError, FioLabError, PreconditionError,
                     UsageError)
from .grid import Grid, SampledField, Side, make_grid

__version__ = "0.1.0"

__all__ = ["CapabilityError", "ConfigurationError", "DomainError", "FioLabError", "Grid", "PreconditionError",
           "SampledField", "Side", "UsageError", "__version__", "make_grid"]
