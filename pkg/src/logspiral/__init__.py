"""Nonsymmetric logarithmic-spiral vortex sheets for the 2D Euler equations.

Modules:

- ``model``: domain types and the scalar maps ``A(a)``, ``r``, ``r_k``.
- ``matrices``: the branch-coupling system, its determinant closed forms,
  a determinant oracle and the explicit LU factors.
- ``asymptotics``: large-``a`` limits, limiting gradients, matrix ``C``.
- ``solver``: Newton continuation of the angles, weights and exponent.
- ``geometry``: spiral sampling, winding number and velocity profile.
- ``cli``: the ``logspiral`` command.
"""
from .errors import (
    DegenerateJacobian,
    DegenerateSystem,
    DomainError,
    LinearDependence,
    NoConvergence,
    NondegeneracyFailure,
    NoSolution,
    OrderingViolated,
    SingularParameter,
    SpiralError,
)
from .model import Angles, SpiralConfig, SpiralFamily, mobius_A, reference_angles, scalar_pack

__all__ = [
    "Angles",
    "SpiralConfig",
    "SpiralFamily",
    "mobius_A",
    "reference_angles",
    "scalar_pack",
    "SpiralError",
    "DomainError",
    "DegenerateSystem",
    "SingularParameter",
    "NoConvergence",
    "DegenerateJacobian",
    "OrderingViolated",
    "NondegeneracyFailure",
    "LinearDependence",
    "NoSolution",
]

__version__ = "0.1.0"
