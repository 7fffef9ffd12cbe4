"""The linear system for the branch weights and its determinant identities.

Row ``m`` of the full matrix couples branch ``m`` to every other branch
through ``e^{A(theta_k - theta_m)}`` times ``e^{-pi A}``, ``cosh(pi A)``
or ``e^{pi A}`` depending on whether ``k`` is after, equal to, or before
``m``.  Subtracting row 0 from the others and fixing ``g_0`` leaves an
``(M-1)``-dimensional system whose Cramer determinants have short
closed forms ``K`` and ``H_l`` (times a power of ``sinh(pi A)``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSystem, DomainError, SingularParameter
from .model import (
    DEG_TOL,
    MATRIX_CAP,
    as_angles,
    check_matrix,
    exp_A,
    hyperbolics,
    mobius_offset,
    scalar_pack,
)

COFACTOR_MAX = 12


@dataclass(frozen=True)
class SystemMatrices:
    A_mat: np.ndarray
    B_mat: np.ndarray
    b_vec: np.ndarray


@dataclass(frozen=True)
class LUFactors:
    L: np.ndarray
    U: np.ndarray


def build_A(a: float, angles) -> np.ndarray:
    """Full ``M x M`` system matrix."""
    th = as_angles(angles).full
    M = th.size
    if M > MATRIX_CAP:
        raise DomainError(f"M = {M} exceeds the matrix cap {MATRIX_CAP}")
    cosh_pa, _ = hyperbolics(a)
    diff = th[None, :] - th[:, None]  # theta_k - theta_m
    upper = exp_A(a, diff, -1)
    lower = exp_A(a, diff, +1)
    k_idx, m_idx = np.meshgrid(np.arange(M), np.arange(M))
    out = np.where(k_idx > m_idx, upper, lower).astype(complex)
    np.fill_diagonal(out, cosh_pa)
    return check_matrix(out)


def build_A_from_scalars(a: float, angles) -> np.ndarray:
    """Same matrix, assembled from ``r`` and the ``r_k`` (second route)."""
    sp = scalar_pack(a, angles)
    M = sp.r_k.size
    out = np.empty((M, M), dtype=complex)
    for m in range(M):
        for k in range(M):
            if k > m:
                out[m, k] = sp.r * sp.r_k[m] / sp.r_k[k]
            elif k == m:
                out[m, k] = sp.c
            else:
                out[m, k] = sp.r_k[m] / (sp.r * sp.r_k[k])
    return out


def elimination_matrix(M: int) -> np.ndarray:
    """Identity with ``-1`` below the first diagonal entry in column 0."""
    E = np.eye(M, dtype=complex)
    E[1:, 0] = -1.0
    return E


def build_B_and_b(a: float, angles) -> SystemMatrices:
    angles = as_angles(angles)
    if angles.M < 2:
        raise DomainError("the reduced system needs M >= 2")
    A_mat = build_A(a, angles)
    A0 = elimination_matrix(angles.M) @ A_mat
    return SystemMatrices(A_mat=A_mat, B_mat=A0[1:, 1:].copy(), b_vec=A0[1:, 0].copy())


def build_Bl(system: SystemMatrices, l: int) -> np.ndarray:
    """Reduced matrix with column ``l`` (1-based) replaced by ``-b``."""
    size = system.B_mat.shape[0]
    if not 1 <= l <= size:
        raise DomainError(f"l must lie in 1..{size}, got {l}")
    Bl = system.B_mat.copy()
    Bl[:, l - 1] = -system.b_vec
    return Bl


def K_closed(a: float, angles) -> complex:
    th = as_angles(angles).full
    M = th.size
    d = mobius_offset(a)
    sign_M = (-1) ** M
    k = np.arange(1, M)
    head = (np.exp(math.pi * d) + sign_M * np.exp(-math.pi * d)) / 2
    tail = np.sum((-1.0) ** k * exp_A(a, th[1:], -1))
    return complex(head + sign_M * tail)


def H_closed(a: float, angles, l: int) -> complex:
    th = as_angles(angles).full
    M = th.size
    if not 1 <= l <= M - 1:
        raise DomainError(f"l must lie in 1..{M - 1}, got {l}")
    d = mobius_offset(a)
    sign_M = (-1) ** M
    k = np.arange(M)
    sgn = (-1.0) ** (l + k)
    head = (np.exp(math.pi * d) - sign_M * np.exp(-math.pi * d)) / 2
    before = np.sum(sgn[:l] * exp_A(a, th[:l] - th[l], 1))
    after = np.sum(sgn[l:] * exp_A(a, th[l:] - th[l], -1))
    return complex(head + before + sign_M * after)


def H_closed_all(a: float, angles) -> np.ndarray:
    angles = as_angles(angles)
    return np.array([H_closed(a, angles, l) for l in range(1, angles.M)], dtype=complex)


def _det_cofactor(mx: np.ndarray) -> complex:
    # Laplace expansion along rows, memoised on the set of unused columns
    n = mx.shape[0]
    memo = {0: 1.0 + 0j}

    def minor(row: int, cols: int) -> complex:
        if cols in memo:
            return memo[cols]
        total = 0j
        pos = 0
        for j in range(n):
            if cols >> j & 1:
                term = mx[row, j] * minor(row + 1, cols & ~(1 << j))
                total += -term if pos & 1 else term
                pos += 1
        memo[cols] = total
        return total

    return minor(0, (1 << n) - 1)


def _det_elimination(mx: np.ndarray) -> complex:
    work = np.array(mx, dtype=complex)
    n = work.shape[0]
    det = 1.0 + 0j
    for col in range(n):
        piv = col + int(np.argmax(np.abs(work[col:, col])))
        if work[piv, col] == 0:
            return 0j
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
            det = -det
        det *= work[col, col]
        factors = work[col + 1:, col] / work[col, col]
        work[col + 1:, col:] -= np.outer(factors, work[col, col:])
    return complex(det)


def det_bruteforce(mx, mode: str = "auto") -> complex:
    """Determinant oracle independent of any closed form.

    ``mode`` is ``"cofactor"`` (only up to 12x12), ``"elimination"``
    (partial pivoting) or ``"auto"`` which picks cofactor when allowed.
    """
    mx = np.asarray(mx, dtype=complex)
    if mx.ndim != 2 or mx.shape[0] != mx.shape[1]:
        raise DomainError(f"determinant needs a square matrix, got shape {mx.shape}")
    n = mx.shape[0]
    if n == 0:
        return 1.0 + 0j
    if mode == "auto":
        mode = "cofactor" if n <= COFACTOR_MAX else "elimination"
    if mode == "cofactor":
        if n > COFACTOR_MAX:
            raise DomainError(f"cofactor mode is limited to {COFACTOR_MAX}x{COFACTOR_MAX}")
        return _det_cofactor(mx)
    if mode == "elimination":
        return _det_elimination(mx)
    raise DomainError(f"unknown determinant mode {mode!r}")


def detB_closed(a: float, angles) -> complex:
    angles = as_angles(angles)
    if angles.M < 2:
        raise DomainError("the reduced system needs M >= 2")
    _, sinh_pa = hyperbolics(a)
    return K_closed(a, angles) * sinh_pa ** (angles.M - 2)


def detBl_closed(a: float, angles, l: int) -> complex:
    angles = as_angles(angles)
    _, sinh_pa = hyperbolics(a)
    return H_closed(a, angles, l) * sinh_pa ** (angles.M - 2)


def solve_gprime(a: float, angles, deg_tol: float = DEG_TOL,
                 require_admissible: bool = True) -> np.ndarray:
    """Weights ratios ``g_l / g_0`` from Cramer's rule, ``H = (H_1..H_{M-1}) / K``.

    With ``require_admissible`` the limiting value of ``K`` must also be
    nonzero, so angle sets whose limit system degenerates are rejected
    even when ``K`` itself is only small.
    """
    angles = as_angles(angles)
    if angles.M < 2:
        raise DomainError("the reduced system needs M >= 2")
    K = K_closed(a, angles)
    if abs(K) <= deg_tol:
        raise DegenerateSystem(f"|K| = {abs(K):.3e} <= {deg_tol:g} at a={a:g}")
    if require_admissible:
        from .asymptotics import limit_K

        Kbar = limit_K(angles)
        if abs(Kbar) <= deg_tol:
            raise DegenerateSystem(
                f"limiting |K| = {abs(Kbar):.3e} <= {deg_tol:g}: angles are not admissible")
    return H_closed_all(a, angles) / K


def lu_factor_A(a: float, angles, tol: float = 1e-12) -> LUFactors:
    """Explicit LU factors of the full matrix from parity-indexed entries."""
    angles = as_angles(angles)
    th = angles.full
    M = th.size
    sp = scalar_pack(a, angles)
    r = sp.r
    ri = 1 / r
    for bad in (1, -1, 1j, -1j):
        if abs(r - bad) <= tol:
            raise SingularParameter(f"r = {r} is within {tol:g} of {bad}")
    L = np.eye(M, dtype=complex)
    U = np.zeros((M, M), dtype=complex)
    low_odd = 2 * ri / (r + ri)
    low_even = 2 * (ri + 1) * (ri - 1) / (r - ri) ** 2
    up_odd = r
    up_even = (r + 1) * (r - 1) / (r + ri)
    diag_odd = (r + ri) / 2
    diag_even = (r - ri) ** 2 / (2 * (r + ri))
    # 1-based parity; r_k / r_j = e^{A(theta_{j-1} - theta_{k-1})}
    for k in range(1, M + 1):
        for j in range(1, k):
            ratio = exp_A(a, th[j - 1] - th[k - 1])
            L[k - 1, j - 1] = ratio * (low_odd if j % 2 else low_even)
    for j in range(1, M + 1):
        U[j - 1, j - 1] = diag_odd if j % 2 else diag_even
        for m in range(j + 1, M + 1):
            ratio = exp_A(a, th[m - 1] - th[j - 1])
            U[j - 1, m - 1] = ratio * (up_odd if j % 2 else up_even)
    return LUFactors(L=L, U=U)


def detA_closed(a: float, angles, tol: float = 1e-12) -> complex:
    """``s^{2p} c^q`` with ``M = 2p + q``."""
    angles = as_angles(angles)
    sp = scalar_pack(a, angles)
    for bad in (1, -1, 1j, -1j):
        if abs(sp.r - bad) <= tol:
            raise SingularParameter(f"r = {sp.r} is within {tol:g} of {bad}")
    p, q = divmod(angles.M, 2)
    return sp.s ** (2 * p) * sp.c ** q
