"""Exception hierarchy shared by every module."""


class SphereNetError(Exception):
    """Base class for all package errors."""


class DimensionError(SphereNetError, ValueError):
    """Operands have incompatible shapes."""


class ContractError(SphereNetError, ValueError):
    """A precondition of an operation was violated by the caller."""


class DataError(SphereNetError, ValueError):
    """Input data is malformed or unusable."""


class NumericError(SphereNetError, ArithmeticError):
    """A computation produced a non-finite or inconsistent value."""


class ConvergenceWarning(UserWarning):
    """An iterative routine stopped before reaching its tolerance."""
