"""Large-``a`` structure of the reduced system.

As ``a`` grows, ``A -> -2i`` and the closed forms ``K``, ``H_l`` tend to
trigonometric sums ``Kbar``, ``Hbar_l``.  This module evaluates those
limits, the limits of ``-a^2 d/da`` of the same quantities, the exact
gradients of ``Fbar = Im(Hbar/Kbar)`` and ``Gbar = Re(Hbar/Kbar)`` at the
reference angles, and the matrix whose invertibility drives the
continuation argument.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSystem, DomainError
from .model import DEG_TOL, SpiralConfig, as_angles, reference_angles

C_CAP = 128
FD_STEP = 1e-6


@dataclass(frozen=True)
class LimitPack:
    Kbar: complex
    Hbar: np.ndarray
    Hbar_ratio: Optional[np.ndarray]
    Fbar: Optional[np.ndarray]
    Gbar: Optional[np.ndarray]

    @property
    def admissible(self) -> bool:
        return self.Hbar_ratio is not None


@dataclass(frozen=True)
class DerivativeLimits:
    dK: complex
    dH: np.ndarray
    RI: Optional[np.ndarray]


def limit_K(angles) -> complex:
    th = as_angles(angles).full
    M = th.size
    sign_M = (-1) ** M
    k = np.arange(1, M)
    tail = np.sum((-1.0) ** k * np.exp(-2j * th[1:]))
    return complex((1 + sign_M) / 2 + sign_M * tail)


def limit_H(angles) -> np.ndarray:
    th = as_angles(angles).full
    M = th.size
    sign_M = (-1) ** M
    k = np.arange(M)
    out = np.empty(M - 1, dtype=complex)
    for l in range(1, M):
        terms = (-1.0) ** (l + k) * np.exp(2j * (th[l] - th))
        out[l - 1] = (1 - sign_M) / 2 + terms[:l].sum() + sign_M * terms[l:].sum()
    return out


def limit_pack(angles, deg_tol: float = DEG_TOL) -> LimitPack:
    angles = as_angles(angles)
    if angles.M < 2:
        raise DomainError("limits need M >= 2")
    Kbar = limit_K(angles)
    Hbar = limit_H(angles)
    if abs(Kbar) <= deg_tol:
        return LimitPack(Kbar, Hbar, None, None, None)
    ratio = Hbar / Kbar
    return LimitPack(Kbar, Hbar, ratio, ratio.imag.copy(), ratio.real.copy())


def is_admissible(angles, deg_tol: float = DEG_TOL) -> bool:
    return abs(limit_K(angles)) > deg_tol


def limit_K_reference(cfg: SpiralConfig) -> complex:
    """``Kbar`` at the reference angles for odd ``M``, in closed form."""
    t1 = cfg.theta1
    return complex(-2j * math.sin(2 * t1)
                   / ((1 + np.exp(-2j * t1)) * (1 + np.exp(2j * t1))))


def derivative_limits(angles, deg_tol: float = DEG_TOL) -> DerivativeLimits:
    """Limits of ``-a^2 dK/da``, ``-a^2 dH_l/da`` and ``-a^2 d(H/K)/da``.

    Each term ``e^{A x}`` contributes ``x e^{-2ix}`` times the limit of
    ``-a^2 dA/da``, which is ``-2``.
    """
    angles = as_angles(angles)
    th = angles.full
    M = th.size
    sign_M = (-1) ** M
    k = np.arange(1, M)
    dK = (sign_M - 1) * math.pi - 2 * sign_M * np.sum(
        (-1.0) ** k * (th[1:] - math.pi) * np.exp(-2j * th[1:]))
    kk = np.arange(M)
    dH = np.empty(M - 1, dtype=complex)
    for l in range(1, M):
        sgn = (-1.0) ** (l + kk)
        diff = th - th[l]
        rot = np.exp(-2j * diff)
        before = np.sum(sgn[:l] * (diff[:l] + math.pi) * rot[:l])
        after = np.sum(sgn[l:] * (diff[l:] - math.pi) * rot[l:])
        dH[l - 1] = -(1 + sign_M) * math.pi - 2 * before - 2 * sign_M * after
    Kbar = limit_K(angles)
    RI = None
    if abs(Kbar) > deg_tol:
        RI = (dH * Kbar - dK * limit_H(angles)) / Kbar ** 2
    return DerivativeLimits(complex(dK), dH, RI)


def dK_reference(cfg: SpiralConfig) -> complex:
    """Closed form for the ``dK`` limit at the reference angles.

    Only valid for the ``n = 1`` family; for ``n = 2`` use
    :func:`derivative_limits`.
    """
    M = cfg.M
    e = np.exp(-2j * cfg.theta1)
    return complex(-(2 * math.pi / M) * ((M + 2) * e + M) / (1 + e) ** 2)


def ref_RI(cfg: SpiralConfig, l: int) -> complex:
    """Closed form for the ``R + iI`` limit at the reference angles, odd ``M``.

    This agrees with the quotient-rule limit for ``n = 1``.  On the
    ``n = 2`` branch ``H`` is identically one, so the true limit is zero
    and this expression does not apply.
    """
    M = cfg.M
    if M < 3 or M % 2 == 0:
        raise DomainError("the closed form needs odd M >= 3")
    if not 1 <= l <= M - 1:
        raise DomainError(f"l must lie in 1..{M - 1}, got {l}")
    t1 = cfg.theta1
    return complex(-1j * math.pi * ((-1) ** l * np.exp(2j * l * t1) - 1)
                   * (1 + np.exp(2j * t1)) / math.sin(2 * t1))


def _scaled_gradients(cfg: SpiralConfig) -> tuple[np.ndarray, np.ndarray]:
    # sin^2(theta_1)-scaled gradients; theta_j = j theta_1 for any integer j
    M = cfg.M
    t1 = cfg.theta1
    s21 = math.sin(2 * t1)
    F = np.empty((M - 1, M - 1))
    G = np.empty((M - 1, M - 1))
    for l in range(1, M):
        for m in range(1, M):
            sm, cm = math.sin(2 * m * t1), math.cos(2 * m * t1)
            slm, clm = math.sin(2 * (l - m) * t1), math.cos(2 * (l - m) * t1)
            if l == m:
                F[l - 1, m - 1] = 2 * math.sin(t1) ** 2 - (-1) ** m * s21 * sm
                G[l - 1, m - 1] = (-1) ** m * cm * s21
            elif l < m:
                F[l - 1, m - 1] = (-1) ** (m + 1) * s21 * (sm + (-1) ** l * slm)
                G[l - 1, m - 1] = (-1) ** m * s21 * (cm - (-1) ** l * clm)
            else:
                F[l - 1, m - 1] = (-1) ** (m + 1) * s21 * (sm - (-1) ** l * slm)
                G[l - 1, m - 1] = (-1) ** m * s21 * (cm + (-1) ** l * clm)
    return F, G


def _check_odd(cfg: SpiralConfig):
    if cfg.M < 3 or cfg.M % 2 == 0:
        raise DomainError(f"need odd M >= 3, got M={cfg.M}")
    if abs(math.sin(cfg.theta1)) < 1e-14:
        raise DomainError("sin(theta_1) vanishes")


def grad_bar(cfg: SpiralConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of ``Fbar`` and ``Gbar`` at the reference angles."""
    _check_odd(cfg)
    F, G = _scaled_gradients(cfg)
    s2 = math.sin(cfg.theta1) ** 2
    return F / s2, G / s2


def matrix_C(cfg: SpiralConfig) -> np.ndarray:
    _check_odd(cfg)
    if cfg.M - 1 > C_CAP:
        raise DomainError(f"M - 1 = {cfg.M - 1} exceeds cap {C_CAP}")
    return _scaled_gradients(cfg)[0]


def grad_limit_fd(angles, step: float = FD_STEP,
                  deg_tol: float = DEG_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of ``Fbar`` and ``Gbar`` at any admissible angles."""
    angles = as_angles(angles)
    if not is_admissible(angles, deg_tol):
        raise DegenerateSystem("Fbar and Gbar are undefined at inadmissible angles")
    th = angles.theta
    n = th.size
    JF = np.empty((n, n))
    JG = np.empty((n, n))
    for m in range(n):
        cols = []
        for sgn in (1, -1):
            full = np.concatenate(([0.0], th))
            full[m + 1] += sgn * step
            cols.append(_ratio_unordered(full, deg_tol))
        diff = (cols[0] - cols[1]) / (2 * step)
        JF[:, m] = diff.imag
        JG[:, m] = diff.real
    return JF, JG


def _ratio_unordered(full: np.ndarray, deg_tol: float) -> np.ndarray:
    # same sums as limit_K / limit_H, without the ordering check on the stencil
    M = full.size
    sign_M = (-1) ** M
    k = np.arange(M)
    Kbar = (1 + sign_M) / 2 + sign_M * np.sum((-1.0) ** k[1:] * np.exp(-2j * full[1:]))
    if abs(Kbar) <= deg_tol:
        raise DegenerateSystem("inadmissible angles inside the difference stencil")
    out = np.empty(M - 1, dtype=complex)
    for l in range(1, M):
        terms = (-1.0) ** (l + k) * np.exp(2j * (full[l] - full))
        out[l - 1] = (1 - sign_M) / 2 + terms[:l].sum() + sign_M * terms[l:].sum()
    return out / Kbar


def gradF_general(angles, step: float = FD_STEP) -> np.ndarray:
    return grad_limit_fd(angles, step)[0]


@dataclass(frozen=True)
class CScanRow:
    M: int
    n: int
    det: float
    sigma_min: float


def _scan_one(M: int, n: int) -> CScanRow:
    C = matrix_C(SpiralConfig(M, n))
    sigma = np.linalg.svd(C, compute_uv=False)
    return CScanRow(M, n, float(np.linalg.det(C)), float(sigma.min()))


def scan_C(max_M: int, n_values=(1, 2), workers: Optional[int] = None) -> list[CScanRow]:
    """Smallest singular value and determinant of ``C`` for odd ``M`` up to ``max_M``."""
    if max_M < 3:
        raise DomainError("max_M must be at least 3")
    cases = [(M, n) for M in range(3, max_M + 1, 2) for n in n_values]
    if workers is None:
        workers = int(os.environ.get("SPIRAL_THREADS", "1") or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: _scan_one(*c), cases))
    return [_scan_one(M, n) for M, n in cases]


def _closed_form_eigenvalues():
    c7 = math.cos(math.pi / 7)
    c9 = math.cos(math.pi / 9)
    r5 = math.sqrt(5)
    rows = {
        (3, 1): [9 / 4],
        (3, 2): [9 / 4],
        (5, 1): [5 / 2, -5 * r5 / 8 + 5 / 8],
        (5, 2): [5 / 2, 5 * r5 / 8 + 5 / 8],
        (7, 1): [-2 * c7**2 + 3 * c7 + 3 / 2, -4 * c7**2 - c7 + 3, -c7**2 - 2 * c7 + 5 / 2],
        (7, 2): [5 * c7**2 - c7 / 2 - 1 / 4, 6 * c7**2 - 2 * c7 - 1, -4 * c7**2 - c7 + 3],
        (9, 1): [-2 * c9**2 + 2 * c9 + 5 / 2, -2 * c9**2 - c9 + 5 / 2, 3 / 2 - 3 * c9,
                 -5 * c9**2 + 2 * c9 + 5 / 2],
        (9, 2): [4 * c9**2 - c9 - 1 / 2, 6 * c9**2 - 3 / 2, c9**2 - 5 * c9 / 2 - 1 / 2,
                 -2 * c9**2 - c9 + 5 / 2],
    }
    # every listed value appears twice
    return {key: sorted(v for v in vals for _ in range(2)) for key, vals in rows.items()}


C_EIGENVALUES = _closed_form_eigenvalues()


def eigen_table(cfg: SpiralConfig) -> tuple[np.ndarray, np.ndarray]:
    """Computed and closed-form eigenvalues of ``C``, both sorted."""
    key = (cfg.M, cfg.n)
    if key not in C_EIGENVALUES:
        raise DomainError(f"no closed-form eigenvalues for (M, n) = {key}")
    eig = np.linalg.eigvals(matrix_C(cfg))
    if np.max(np.abs(eig.imag)) > 1e-8:
        raise DomainError("unexpected complex eigenvalues")
    return np.sort(eig.real), np.array(C_EIGENVALUES[key])


def evenM_facts(M: int, angles=None, n: int = 1) -> tuple[complex, Optional[np.ndarray]]:
    """For even ``M``: ``Kbar`` at the reference angles and the defect of
    ``Fbar_l = (-1)^l sin(2 theta_l)`` at ``angles`` (``None`` if inadmissible)."""
    if M < 4 or M % 2:
        raise DomainError(f"need even M >= 4, got {M}")
    Kref = limit_K(reference_angles(SpiralConfig(M, n)))
    if angles is None:
        return Kref, None
    angles = as_angles(angles)
    if angles.M != M:
        raise DomainError(f"expected {M - 1} angles, got {len(angles)}")
    pack = limit_pack(angles)
    if not pack.admissible:
        return Kref, None
    l = np.arange(1, M)
    return Kref, pack.Fbar - (-1.0) ** l * np.sin(2 * angles.theta)
