"""Domain types and the scalar maps used by every other module.

The tightness parameter ``a`` enters all formulas through the complex
number ``A(a) = -2ai/(a+i)``.  For large ``a`` we have ``A = -2i + d`` with
``d = -2/(a+i)`` small, and most exponentials are evaluated through that
split so that ``e^{A(x + j pi)}`` keeps full relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEG_TOL = 1e-10
MATRIX_CAP = 64


def _check_a(a) -> float:
    try:
        a = float(a)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"a must be a real number, got {a!r}") from exc
    if not math.isfinite(a) or a <= 0:
        raise DomainError(f"a must be positive and finite, got {a}")
    return a


def mobius_A(a: float) -> complex:
    """Return ``A = -2ai/(a+i)``."""
    a = _check_a(a)
    # both parts in closed form: no cancellation for small or large a
    if a > 1.0:
        inv = 1.0 / a
        return complex(-2 * inv, -2.0) / (1 + inv * inv)
    return complex(-2 * a, -2 * a * a) / (1 + a * a)


def mobius_offset(a: float) -> complex:
    """Return ``A + 2i = -2/(a+i)``, computed without cancellation."""
    a = _check_a(a)
    return -2.0 / complex(a, 1.0)


def exp_A(a: float, x, half_turns: int = 0):
    """Evaluate ``e^{A(x + j pi)}`` for real ``x`` and integer ``j``.

    Uses ``e^{-2i j pi} = 1`` so the large imaginary part of ``A`` only
    ever multiplies ``x``.  Works elementwise on arrays.
    """
    d = mobius_offset(a)
    x = np.asarray(x, dtype=float)
    out = np.exp(-2j * x) * np.exp(d * (x + half_turns * math.pi))
    return out if out.ndim else complex(out)


def hyperbolics(a: float) -> tuple[complex, complex]:
    """Return ``(cosh(pi A), sinh(pi A))``."""
    d = mobius_offset(a)
    # sinh(pi(-2i + d)) = sinh(pi d) because e^{-2 pi i} = 1
    return complex(np.cosh(math.pi * d)), complex(np.sinh(math.pi * d))


@dataclass(frozen=True)
class SpiralConfig:
    """Problem instance: number of branches ``M`` and angle family ``n``."""

    M: int
    n: int = 1

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "n", int(self.n))

    @property
    def theta1(self) -> float:
        return self.n * math.pi / self.M


@dataclass(frozen=True, eq=False)
class Angles:
    """Offset angles ``theta_1 < ... < theta_{M-1}``; ``theta_0 = 0`` is implicit."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.array(self.theta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(th)):
            raise DomainError("angles must be finite")
        if th.size and np.any(np.diff(th) <= 0):
            raise DomainError("angles must be strictly increasing")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @property
    def M(self) -> int:
        return self.theta.size + 1

    @property
    def full(self) -> np.ndarray:
        """All M angles including ``theta_0 = 0``."""
        return np.concatenate(([0.0], self.theta))

    @property
    def in_U(self) -> bool:
        """True if ``0 < theta_1`` and ``theta_{M-1} < 2 pi``."""
        if self.theta.size == 0:
            return True
        return bool(self.theta[0] > 0 and self.theta[-1] < 2 * math.pi)

    def __len__(self):
        return self.theta.size

    def __eq__(self, other):
        if not isinstance(other, Angles):
            return NotImplemented
        return np.array_equal(self.theta, other.theta)

    def __repr__(self):
        return f"Angles({self.theta.tolist()!r})"


def as_angles(angles) -> Angles:
    """Coerce a sequence of offset angles into :class:`Angles`."""
    if isinstance(angles, Angles):
        return angles
    return Angles(np.asarray(angles, dtype=float))


@dataclass(frozen=True)
class ScalarPack:
    r: complex
    r_k: np.ndarray
    c: complex
    s: complex


def scalar_pack(a: float, angles) -> ScalarPack:
    """Return ``r = e^{-A pi}``, ``r_k = e^{-A theta_{k-1}}``, ``c`` and ``s``.

    ``c = (r + 1/r)/2 = cosh(pi A)`` and ``s = (r - 1/r)/2 = -sinh(pi A)``.
    """
    angles = as_angles(angles)
    d = mobius_offset(a)
    r = complex(np.exp(-math.pi * d))
    r_k = exp_A(a, -angles.full)
    r_k = np.atleast_1d(r_k)
    c = (r + 1 / r) / 2
    s = (r - 1 / r) / 2
    return ScalarPack(r=r, r_k=r_k, c=c, s=s)


def reference_angles(cfg: SpiralConfig) -> Angles:
    """The reference family ``theta_k = k n pi / M`` for ``k = 1..M-1``."""
    if cfg.M < 2:
        raise DomainError("reference angles need M >= 2")
    k = np.arange(1, cfg.M)
    return Angles(k * cfg.n * math.pi / cfg.M)


@dataclass(frozen=True, eq=False)
class SpiralFamily:
    """A full solution record ``(a, angles, g_0..g_{M-1}, mu)``.

    ``residual`` is the largest scaled defect of the discrete system, as
    produced by :func:`logspiral.solver.residual_eq_disc`.
    """

    a: float
    angles: Angles
    g: np.ndarray
    mu: float
    residual: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "a", _check_a(self.a))
        object.__setattr__(self, "angles", as_angles(self.angles))
        g = np.array(self.g, dtype=float).reshape(-1)
        if g.size != self.angles.M:
            raise DomainError(f"expected {self.angles.M} weights, got {g.size}")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def M(self) -> int:
        return self.angles.M

    @property
    def in_U(self) -> bool:
        return self.angles.in_U


def check_matrix(mx: np.ndarray, cap: int = MATRIX_CAP) -> np.ndarray:
    """Validate a dense complex matrix: square-or-vector, finite, size-capped."""
    mx = np.asarray(mx)
    if max(mx.shape, default=0) > cap:
        raise DomainError(f"matrix dimension {mx.shape} exceeds cap {cap}")
    if not np.all(np.isfinite(mx)):
        raise DomainError("matrix has non-finite entries")
    return mx
