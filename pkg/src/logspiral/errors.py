"""Exception types shared across the package."""


class SpiralError(Exception):
    """Base class for all package errors."""


class DomainError(SpiralError, ValueError):
    """An input lies outside the domain of an operation."""


class DegenerateSystem(SpiralError):
    """The reduced system cannot be solved by Cramer's rule (K vanishes)."""


class SingularParameter(SpiralError):
    """The LU factorization of the full system matrix does not exist."""


class NoConvergence(SpiralError):
    """Newton iteration hit its iteration cap or stalled."""


class DegenerateJacobian(SpiralError):
    """The Newton Jacobian is numerically singular."""


class OrderingViolated(SpiralError):
    """An iterate lost the strict ordering of the angles."""


class NondegeneracyFailure(SpiralError):
    """The limiting Jacobian (matrix C) is singular or unavailable."""


class LinearDependence(SpiralError):
    """E1 and E2 are linearly dependent over the reals."""


class NoSolution(SpiralError):
    """A small real linear system has no unique solution."""
