"""Exception hierarchy shared by all modules."""


class HalfspaceError(Exception):
    """Base class for errors raised by this package."""


class DomainError(HalfspaceError, ValueError):
    """An argument lies outside the domain of the function being evaluated."""


class ParameterError(HalfspaceError, ValueError):
    """Parameters are individually valid but infeasible together."""


class TableRangeError(HalfspaceError, ValueError):
    """A query falls outside the range covered by a profile table."""


class HorizonError(HalfspaceError, ValueError):
    """Evaluation was requested past the maximal existence time."""


class NotApplicableError(HalfspaceError):
    """The construction does not exist for this cone."""


class ConsistencyError(HalfspaceError, RuntimeError):
    """An internal numerical cross-check failed."""


class QuadratureError(HalfspaceError, RuntimeError):
    """Adaptive quadrature failed to reach its tolerance."""
