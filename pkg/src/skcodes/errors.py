"""Exception hierarchy shared by every module of the package."""


class SkCodesError(Exception):
    """Base class for all errors raised by skcodes."""


class DimensionError(SkCodesError, ValueError):
    """Operand lengths or matrix shapes are incompatible."""


class RankError(SkCodesError, ValueError):
    """A matrix required to have full row rank does not."""


class DomainError(SkCodesError, ValueError):
    """A probability or other parameter lies outside its admissible range."""


class ParameterError(SkCodesError, ValueError):
    """Inconsistent or infeasible construction parameters."""


class CapacityError(SkCodesError, MemoryError):
    """An exhaustive computation exceeds its configured budget."""
