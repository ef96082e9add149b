"""Exception hierarchy shared by the whole engine."""


class GeometryError(Exception):
    """Base class for every failure raised by this package."""


class ChartDomainError(GeometryError):
    """A point (or a finite-difference stencil around it) leaves the chart domain."""


class ContractViolationError(GeometryError):
    """An argument violates an operation contract (e.g. a non-form where a form is required)."""


class PreconditionError(GeometryError):
    """A declared precondition of an operation does not hold for the given manifold."""


class NumericError(GeometryError):
    """Numerical degeneracy: non-SPD metric, vanishing volume element, and similar."""


class ConventionError(GeometryError):
    """Internal sign/convention cross-checks disagree beyond tolerance."""


class UnknownManifoldError(KeyError, GeometryError):
    """Requested catalog entry does not exist."""
