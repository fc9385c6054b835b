"""Exception types shared across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat and explicit.
"""


class FvmcError(Exception):
    """Base class for all package-specific errors."""


class InvalidModelError(FvmcError):
    """A model or experiment configuration violates a structural invariant."""


class NonFiniteStateError(FvmcError):
    """An Euler update produced a NaN or infinite coordinate."""


class ExplosionGuardError(FvmcError):
    """The branching count exceeded branch_cap before the horizon was reached.

    Signals that the configured system is (numerically) exploding; the
    non-explosion requirement does not hold at this configuration.
    """

    def __init__(self, message: str, replica_index: int | None = None):
        super().__init__(message)
        self.replica_index = replica_index


class UnsupportedModelError(FvmcError):
    """The exact semigroup is not computable for this model."""


class QuadratureNotConvergedError(FvmcError):
    """Doubling the panel count moved the integral by more than the tolerance."""
