"""Spiral curves, circulation, vorticity density and the velocity profile.

Branch ``m`` at time ``t`` is ``Z_m(theta, t) = t^mu e^{a(theta - theta_m)} e^{i theta}``
with cumulative circulation ``Gamma_m = g_m t^{2 mu - 1} e^{2a(theta - theta_m)}``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .model import SpiralFamily, exp_A, mobius_offset

SHEET_EXCLUSION = 1e-8


class NearSheetWarning(UserWarning):
    """The profile was evaluated closer to the sheet than the exclusion."""
# keep e^{2a(theta - theta_m)} well inside double range
MAX_LOG_GROWTH = 300.0


@dataclass(frozen=True)
class SpiralSample:
    m: int
    theta: float
    t: float
    z: complex
    gamma_cum: float
    gamma_density: float


def default_theta_range(family: SpiralFamily, m: int, turns: float = 1.0) -> tuple[float, float]:
    """From ``6 pi ln(10) / a`` below ``theta_m`` to ``turns`` turns above,
    the upper end capped so that the circulation stays finite."""
    a = family.a
    theta_m = family.angles.full[m]
    lo = theta_m - 6 * math.pi * math.log(10) / a
    hi = theta_m + min(2 * math.pi * turns, MAX_LOG_GROWTH / a)
    return lo, hi


def sample_spiral(family: SpiralFamily, m: int, t: float = 1.0,
                  theta_range: Optional[tuple[float, float]] = None,
                  npoints: int = 200, turns: float = 1.0) -> list[SpiralSample]:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if npoints < 2:
        raise DomainError("npoints must be at least 2")
    if not 0 <= m < family.M:
        raise DomainError(f"m must lie in 0..{family.M - 1}")
    if theta_range is None:
        theta_range = default_theta_range(family, m, turns)
    a, mu, g_m = family.a, family.mu, family.g[m]
    theta_m = family.angles.full[m]
    theta = np.linspace(theta_range[0], theta_range[1], npoints)
    grow = np.exp(a * (theta - theta_m))
    z = t ** mu * grow * np.exp(1j * theta)
    gamma = g_m * t ** (2 * mu - 1) * grow ** 2
    density = 2 * a * g_m * t ** (mu - 1) * grow / math.sqrt(1 + a * a)
    return [SpiralSample(m, float(th), float(t), complex(zz), float(gc), float(gd))
            for th, zz, gc, gd in zip(theta, z, gamma, density)]


def circulation(family: SpiralFamily, m: int, theta, t: float = 1.0):
    grow = np.exp(family.a * (np.asarray(theta, dtype=float) - family.angles.full[m]))
    return family.g[m] * t ** (2 * family.mu - 1) * grow ** 2


def _winding_holds(j: int, r: float, theta: float, theta_k: float, a: float) -> bool:
    return a * (2 * math.pi * j + theta_k - theta) + math.log(r) > 0


def winding_number(r: float, theta: float, theta_k: float, a: float) -> int:
    """Smallest integer ``j`` with ``a(2 pi j + theta_k - theta) + ln r > 0``."""
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    x = (theta - theta_k - math.log(r) / a) / (2 * math.pi)
    j = math.floor(x) + 1
    # guard against rounding at the boundary
    while not _winding_holds(j, r, theta, theta_k, a):
        j += 1
    while _winding_holds(j - 1, r, theta, theta_k, a):
        j -= 1
    return j


def sheet_distance(family: SpiralFamily, z: complex) -> float:
    """Distance from ``z`` to the sheet at ``t = 1``, in log-radius units.

    For a point on the ray through ``z`` the sheet crosses at radii
    ``e^{a(phi + 2 pi j - theta_k)}``; the value returned is the smallest
    ``|ln|z| - ln(radius)|``, i.e. a relative radial distance.
    """
    if z == 0:
        raise DomainError("z must be nonzero")
    log_r, phi = math.log(abs(z)), math.atan2(z.imag, z.real)
    best = math.inf
    for theta_k in family.angles.full:
        # nearest crossing: solve a(phi + 2 pi j - theta_k) ~ log_r
        j0 = round((log_r / family.a - phi + theta_k) / (2 * math.pi))
        for j in (j0 - 1, j0, j0 + 1):
            best = min(best, abs(log_r - family.a * (phi + 2 * math.pi * j - theta_k)))
    return best


def velocity_profile(family: SpiralFamily, z: complex,
                     exclusion: float = SHEET_EXCLUSION) -> complex:
    """Self-similar profile ``w(z)``; the velocity is ``t^{mu-1} w(z / t^mu)``.

    Defined off the sheet and the origin.  Points closer than ``exclusion``
    (see :func:`sheet_distance`) are still evaluated but raise a
    :class:`NearSheetWarning`, since the profile jumps across the sheet.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("the profile is undefined at the origin")
    if exclusion > 0 and sheet_distance(family, z) < exclusion:
        warnings.warn(f"z={z} lies within {exclusion} of the sheet", NearSheetWarning, stacklevel=2)
    a = family.a
    r, theta = abs(z), math.atan2(z.imag, z.real)
    d = mobius_offset(a)
    denom = -np.expm1(2 * math.pi * d)  # 1 - e^{2 pi A}
    power = np.exp(2 * a / complex(a, 1.0) * math.log(r))
    total = 0j
    for g_k, theta_k in zip(family.g, family.angles.full):
        J = winding_number(r, theta, theta_k, a)
        inner = power * exp_A(a, theta_k - theta + 2 * math.pi * J) / denom
        total += 2 * a * g_k / (r * complex(a, -1.0)) * np.conj(inner)
    return complex(np.exp(1j * theta) * total)


def velocity(family: SpiralFamily, z: complex, t: float) -> complex:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    scale = t ** family.mu
    return t ** (family.mu - 1) * velocity_profile(family, complex(z) / scale)
