"""Error types shared by every diqkd-lab module."""


class DomainError(ValueError):
    """An input lies outside the domain of the requested operation."""


class PreconditionError(DomainError):
    """An operator argument is malformed (shape, Hermiticity, ±1 spectrum)."""


class EstimationError(DomainError):
    """An empirical estimate cannot be formed from the available rounds."""


class InconsistentParametersError(DomainError):
    """Observed statistics are not achievable under the claimed parameters."""


class NumericFailure(RuntimeError):
    """A numerical routine did not converge or missed its own invariant."""
