"""Solve for the angles, weights and similarity exponent.

The imaginary part of the Cramer solution ``H(a, angles)`` must vanish
for the weights to be real.  We solve ``Im H = 0`` by damped Newton and
follow the root from large ``a`` downward, then recover ``g_0`` and
``mu`` from the first equation of the full system, written as
``g_0 E1 + mu E2 = -((1 + a^2) / 2a) K``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .asymptotics import (
    derivative_limits,
    grad_bar,
    grad_limit_fd,
    limit_K,
    matrix_C,
)
from .errors import (
    DegenerateJacobian,
    DegenerateSystem,
    DomainError,
    LinearDependence,
    NoConvergence,
    NondegeneracyFailure,
    NoSolution,
    OrderingViolated,
    SpiralError,
)
from .matrices import H_closed_all, K_closed, build_A, solve_gprime
from .model import (
    DEG_TOL,
    Angles,
    SpiralConfig,
    SpiralFamily,
    as_angles,
    exp_A,
    hyperbolics,
    mobius_A,
    mobius_offset,
    reference_angles,
)

LI_TOL = 1e-10
SIGMA_TOL = 1e-8
G_MIN = 1e-8


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = 1e-7
    damping: float = 1.0
    min_damping: float = 2.0 ** -10
    jacobian: str = "analytic"

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if self.jacobian not in ("analytic", "fd"):
            raise DomainError("jacobian must be 'analytic' or 'fd'")


# -- residual map and its Jacobian -------------------------------------------

def F_of(a: float, angles) -> np.ndarray:
    """``Im H(a, angles)``; zero exactly when the weight ratios are real."""
    return solve_gprime(a, angles).imag


def _K_H_gradients(a: float, th: np.ndarray):
    # K, H and their derivatives in theta_1..theta_{M-1}; each term
    # c e^{A(theta_k - theta_l + j pi)} differentiates to +-A times itself
    M = th.size
    A = mobius_A(a)
    sign_M = (-1) ** M
    k = np.arange(M)
    K = K_closed(a, th[1:])
    tail = sign_M * (-1.0) ** k[1:] * exp_A(a, th[1:], -1)
    dK = A * tail
    H = np.empty(M - 1, dtype=complex)
    dH = np.zeros((M - 1, M - 1), dtype=complex)
    for l in range(1, M):
        sgn = (-1.0) ** (l + k)
        terms = np.empty(M, dtype=complex)
        terms[:l] = sgn[:l] * exp_A(a, th[:l] - th[l], 1)
        terms[l:] = sign_M * sgn[l:] * exp_A(a, th[l:] - th[l], -1)
        H[l - 1] = _H_head(a, M) + terms.sum()
        grad = np.zeros(M, dtype=complex)
        grad += A * terms          # d/d theta_k
        grad[l] -= A * terms.sum()  # d/d theta_l
        dH[l - 1] = grad[1:]
    return K, H, dK, dH


def _H_head(a: float, M: int) -> complex:
    cosh_pa, sinh_pa = hyperbolics(a)
    # (e^{pi A} - (-1)^M e^{-pi A}) / 2
    return sinh_pa if M % 2 == 0 else cosh_pa


def analytic_jacobian(a: float, angles) -> np.ndarray:
    """Exact Jacobian of ``F_of`` with respect to the angles."""
    angles = as_angles(angles)
    K, H, dK, dH = _K_H_gradients(a, angles.full)
    if abs(K) <= DEG_TOL:
        raise DegenerateSystem(f"|K| = {abs(K):.3e} at a={a:g}")
    J = (dH * K - np.outer(H, dK)) / K ** 2
    return J.imag


def fd_jacobian(a: float, angles, step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of ``F_of``."""
    angles = as_angles(angles)
    th = angles.theta
    n = th.size
    J = np.empty((n, n))
    for m in range(n):
        plus, minus = th.copy(), th.copy()
        plus[m] += step
        minus[m] -= step
        J[:, m] = (F_of(a, plus) - F_of(a, minus)) / (2 * step)
    return J


@dataclass(frozen=True)
class NewtonResult:
    angles: Angles
    iterations: int
    residual: float


def newton_solve(a: float, theta_init, settings: NewtonSettings = NewtonSettings()) -> NewtonResult:
    """Damped Newton on ``F(a, .) = 0`` with monotone residual halving."""
    theta = as_angles(theta_init).theta.copy()
    f = F_of(a, theta)
    res = float(np.max(np.abs(f)))
    for it in range(settings.max_iter + 1):
        if res <= settings.tol:
            return NewtonResult(Angles(theta), it, res)
        if it == settings.max_iter:
            break
        if settings.jacobian == "analytic":
            J = analytic_jacobian(a, theta)
        else:
            J = fd_jacobian(a, theta, settings.fd_step)
        scale = float(np.prod(np.linalg.norm(J, axis=1)))
        if scale == 0 or abs(np.linalg.det(J)) < 1e-12 * scale:
            raise DegenerateJacobian(f"singular Jacobian at a={a:g}")
        step = np.linalg.solve(J, -f)
        lam = settings.damping
        ordered_seen = False
        while lam >= settings.min_damping:
            trial = theta + lam * step
            if np.all(np.diff(trial) > 0):
                ordered_seen = True
                try:
                    f_trial = F_of(a, trial)
                except DegenerateSystem:
                    f_trial = None
                if f_trial is not None:
                    res_trial = float(np.max(np.abs(f_trial)))
                    if res_trial < res:
                        theta, f, res = trial, f_trial, res_trial
                        break
            lam /= 2
        else:
            if not ordered_seen:
                raise OrderingViolated(f"every damped step breaks the angle ordering at a={a:g}")
            raise NoConvergence(f"residual stalled at {res:.3e} (a={a:g})")
    raise NoConvergence(f"no convergence in {settings.max_iter} iterations (a={a:g}, residual {res:.3e})")


def newton_theta(a: float, theta_init, settings: NewtonSettings = NewtonSettings()) -> Angles:
    return newton_solve(a, theta_init, settings).angles


# -- first-order expansion in 1/a --------------------------------------------

@dataclass(frozen=True)
class Expansion:
    theta_minus1: np.ndarray
    G_minus1: np.ndarray
    RI: np.ndarray
    gradient_source: str


def check_nondegenerate(cfg: SpiralConfig) -> None:
    """Raise :class:`NondegeneracyFailure` unless the branch can be continued."""
    if cfg.M == 2:
        return
    if cfg.M < 2 or cfg.M % 2 == 0:
        raise NondegeneracyFailure(
            f"matrix C is not available for M={cfg.M}: only M=2 or odd M are supported")
    sigma = np.linalg.svd(matrix_C(cfg), compute_uv=False).min()
    if sigma <= SIGMA_TOL:
        raise NondegeneracyFailure(f"matrix C is singular for M={cfg.M}, n={cfg.n} (sigma_min={sigma:.3e})")


def expansion(cfg: SpiralConfig) -> Expansion:
    """``Theta_{-1}`` and ``G_{-1}`` from the limiting gradients.

    The ``R + iI`` vector comes from the quotient-rule limits, which hold
    for every admissible angle set.  For odd ``M`` the gradients are the
    exact reference-angle formulas; for ``M = 2`` they are finite
    differences of the limit map.
    """
    check_nondegenerate(cfg)
    ref = reference_angles(cfg)
    RI = derivative_limits(ref).RI
    if RI is None:
        raise NondegeneracyFailure("reference angles are not admissible")
    if cfg.M == 2:
        gF, gG = grad_limit_fd(ref)
        source = "finite-difference"
    else:
        gF, gG = grad_bar(cfg)
        source = "exact"
    try:
        tm1 = -np.linalg.solve(gF, RI.imag)
    except np.linalg.LinAlgError as exc:
        raise NondegeneracyFailure("limiting gradient is singular") from exc
    Gm1 = RI.real + gG @ tm1
    return Expansion(tm1, Gm1, RI, source)


def theta_minus1(cfg: SpiralConfig) -> np.ndarray:
    return expansion(cfg).theta_minus1


def G_minus1(cfg: SpiralConfig) -> np.ndarray:
    return expansion(cfg).G_minus1


def e2_expansion(cfg: SpiralConfig) -> tuple[float, complex]:
    """Leading two coefficients of ``E2(a) = E20 + E2m1 / a + o(1/a)`` for odd ``M``."""
    if cfg.M < 3 or cfg.M % 2 == 0:
        raise DomainError("the E2 expansion is defined for odd M >= 3")
    t1 = cfg.theta1
    E20 = 2 * math.sin(2 * t1) / ((1 + np.exp(-2j * t1)) * (1 + np.exp(2j * t1)))
    ref = reference_angles(cfg)
    tm1 = theta_minus1(cfg)
    Kbar = limit_K(ref)
    dK = derivative_limits(ref).dK
    k = np.arange(1, cfg.M)
    grad_K = 2j * (-1.0) ** k * np.exp(-2j * ref.theta)
    E2m1 = -Kbar + 1j * dK + 1j * np.dot(grad_K, tm1)
    return float(E20.real), complex(E2m1)


# -- weights and similarity exponent -----------------------------------------

@dataclass(frozen=True)
class EPair:
    E1: complex
    E2: complex
    det2: float
    g0: float
    mu: float


def e1_closed(a: float) -> complex:
    """``a cosh(pi A)``, the value of ``E1`` for odd ``M``."""
    return a * hyperbolics(a)[0]


def _e1_terms(a: float, th: np.ndarray) -> np.ndarray:
    # cosh(pi A) K + sum_l H_l e^{A(theta_l - pi)} term by term, with every
    # product of exponentials merged into one exponential
    M = th.size
    sign_M = (-1) ** M
    cosh_pa, sinh_pa = hyperbolics(a)
    head_K = sinh_pa if M % 2 else cosh_pa
    head_H = cosh_pa if M % 2 else sinh_pa
    k = np.arange(M)
    parts = [np.atleast_1d(cosh_pa * head_K),
             cosh_pa * sign_M * (-1.0) ** k[1:] * exp_A(a, th[1:], -1),
             head_H * exp_A(a, th[1:], -1)]
    for l in range(1, M):
        sgn = (-1.0) ** (l + k)
        parts.append(sgn[:l] * exp_A(a, th[:l], 0))
        parts.append(sign_M * sgn[l:] * exp_A(a, th[l:], -2))
    return np.concatenate(parts)


def _e1_bracket_termwise(a: float, th: np.ndarray) -> complex:
    """Compensated sum of the individual terms (reference route)."""
    terms = _e1_terms(a, th)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _e1_bracket(a: float, th: np.ndarray) -> complex:
    """Same sum, grouped by the exponential ``e^{A theta_k}`` it carries.

    Every term is ``e^{A theta_k}`` times ``1``, ``e^{-pi A}`` or
    ``e^{-2 pi A}``.  With ``q = e^{-2 pi A} - 1`` the group factor is
    ``Z_k + q W_k`` with exact integer or half-integer ``Z_k, W_k``, so
    the O(1) parts cancel without rounding.  Termwise summation loses
    about ``eps * a`` relative accuracy instead.
    """
    M = th.size
    sign_M = (-1) ** M
    odd = M % 2 == 1
    cosh_pa, sinh_pa = hyperbolics(a)
    q = complex(np.expm1(-2 * math.pi * mobius_offset(a)))
    # coefficients of e^{A theta_k}, e^{A theta_k} e^{-pi A}, e^{A theta_k} e^{-2 pi A}
    plain = np.zeros(M)
    via_cosh = np.zeros(M)
    via_head = np.zeros(M)
    double = np.zeros(M)
    for k in range(1, M):
        via_cosh[k] = sign_M * (-1) ** k
        via_head[k] = 1.0
    for l in range(1, M):
        for k in range(M):
            if k < l:
                plain[k] += (-1) ** (l + k)
            else:
                double[k] += sign_M * (-1) ** (l + k)
    # e^{-pi A} cosh(pi A) = 1 + q/2; e^{-pi A} sinh(pi A) = -q/2; e^{-2 pi A} = 1 + q
    Z = plain + via_cosh + double + (via_head if odd else 0.0)
    W = via_cosh / 2 + double + (via_head / 2 if odd else -via_head / 2)
    if odd:
        head = cosh_pa * sinh_pa
    else:
        # cosh^2 = 1 + sinh^2, and the 1 joins the theta_0 = 0 group
        head = sinh_pa * sinh_pa
        Z[0] += 1.0
    terms = np.concatenate(([head], exp_A(a, th, 0) * (Z + q * W)))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def solve_g0_mu(a: float, angles, gprime=None, li_tol: float = LI_TOL) -> EPair:
    """Recover ``g_0`` and ``mu`` from the first equation of the full system.

    ``E1 = (a / sinh(pi A)) (cosh(pi A) K + sum_l H_l e^{A(theta_l - pi)})``
    is evaluated with the Cramer numerators ``H_l`` rather than ``gprime``,
    so it does not inherit the tolerance-sized imaginary part of the
    weight ratios.  ``E2 = (i - 1/a) K``.
    """
    angles = as_angles(angles)
    th = angles.full
    K = K_closed(a, angles)
    if abs(K) <= DEG_TOL:
        raise DegenerateSystem(f"|K| = {abs(K):.3e} at a={a:g}")
    if gprime is not None and np.asarray(gprime).shape != (angles.M - 1,):
        raise DomainError("gprime has the wrong length")
    cosh_pa, sinh_pa = hyperbolics(a)
    E1 = complex(a / sinh_pa * _e1_bracket(a, th))
    E2 = complex((1j - 1 / a) * K)
    rhs = -(1 + a * a) / (2 * a) * K
    S = np.array([[E1.real, E2.real], [E1.imag, E2.imag]])
    det2 = float(np.linalg.det(S))
    if abs(det2) <= li_tol:
        raise LinearDependence(f"E1 and E2 are dependent at a={a:g} (det={det2:.3e})")
    g0, mu = np.linalg.solve(S, [rhs.real, rhs.imag])
    return EPair(E1, E2, det2, float(g0), float(mu))


def rhs_eq_disc(a: float, mu: float) -> complex:
    """Right-hand side shared by every row of the discrete system."""
    sinh_pa = hyperbolics(a)[1]
    return -(sinh_pa / (2 * a * a)) * (1 + a * a - 2 * mu * (1 - a * 1j))


def residual_eq_disc(family: SpiralFamily, scaled: bool = True) -> np.ndarray:
    """Per-row defect of the discrete system.

    With ``scaled`` each defect is divided by the sum of the moduli of the
    terms in that row, which makes the value comparable across the wide
    range of magnitudes ``g_0`` and ``mu`` take as ``a`` grows.
    """
    a, g, mu = family.a, family.g, family.mu
    A_mat = build_A(a, family.angles)
    rhs = rhs_eq_disc(a, mu)
    defect = np.abs(A_mat @ g - rhs)
    if not scaled:
        return defect
    sinh_pa = hyperbolics(a)[1]
    scale = (np.abs(A_mat) @ np.abs(g)
             + abs(sinh_pa) / (2 * a * a) * (1 + a * a + 2 * abs(mu) * abs(1 - a * 1j)))
    return defect / scale


def assemble_family(a: float, angles, g0: float, gprime, mu: float) -> SpiralFamily:
    angles = as_angles(angles)
    g = np.concatenate(([g0], g0 * np.asarray(gprime, dtype=float)))
    trial = SpiralFamily(a, angles, g, mu)
    res = float(residual_eq_disc(trial).max())
    return SpiralFamily(a, angles, g, mu, res)


def alexander_family(M: int, a: float) -> SpiralFamily:
    """Symmetric family ``theta_k = 2 k pi / M`` with equal weights."""
    angles = reference_angles(SpiralConfig(M, 2))
    pair = solve_g0_mu(a, angles)
    return assemble_family(a, angles, pair.g0, np.ones(M - 1), pair.mu)


# -- single-branch (M = 1) case ----------------------------------------------

def prandtl_solve(a: float) -> tuple[float, float]:
    """Real ``(g, mu)`` with ``-2 a^2 g coth(pi A) = a^2 + 1 - 2 mu + 2 a mu i``."""
    cosh_pa, sinh_pa = hyperbolics(a)
    L = -2 * a * a * cosh_pa / sinh_pa
    S = np.array([[L.real, 2.0], [L.imag, -2.0 * a]])
    det = np.linalg.det(S)
    if abs(det) <= LI_TOL * max(1.0, np.abs(S).max() ** 2):
        raise NoSolution(f"singular 2x2 system at a={a:g}")
    g, mu = np.linalg.solve(S, [a * a + 1, 0.0])
    return float(g), float(mu)


def prandtl_residual(a: float, g: float, mu: float) -> float:
    """Defect of the single-branch equation relative to ``a^2 + 1``."""
    cosh_pa, sinh_pa = hyperbolics(a)
    lhs = -2 * a * a * g * cosh_pa / sinh_pa
    rhs = a * a + 1 - 2 * mu + 2j * a * mu
    return abs(lhs - rhs) / (a * a + 1)


def prandtl_via_system(a: float) -> tuple[float, float]:
    """Same pair from the 1x1 discrete system ``cosh(pi A) g = rhs(mu)``."""
    A11 = build_A(a, Angles([]))[0, 0]
    sinh_pa = hyperbolics(a)[1]
    c = sinh_pa / (2 * a * a)
    # A11 g - 2 c (1 - a i) mu = -c (1 + a^2)
    coef_mu = -2 * c * (1 - a * 1j)
    rhs = -c * (1 + a * a)
    S = np.array([[A11.real, coef_mu.real], [A11.imag, coef_mu.imag]])
    g, mu = np.linalg.solve(S, [rhs.real, rhs.imag])
    return float(g), float(mu)


# -- uniform-weight check ----------------------------------------------------

@dataclass(frozen=True)
class NontrivialityReport:
    row_values: np.ndarray
    closed_form: np.ndarray
    agreement: float
    min_pairwise_gap: float


def row_sums_closed(M: int, a: float) -> np.ndarray:
    """Row sums of the full matrix at ``theta_k = k pi / M`` (geometric series)."""
    A = mobius_A(a)
    p = np.exp(math.pi * A / M)
    m = np.arange(M)
    sinh_pa = np.sinh(math.pi * A)
    return sinh_pa * (1 + p) / (p - 1) + np.exp(-math.pi * A * m / M) * (np.exp(math.pi * A) - 1) / (1 - p)


def row_sums_printed(M: int, a: float) -> np.ndarray:
    """The same geometric-series form with ``p^2 - 1`` in the first denominator.

    Kept for comparison only: it differs from the row sums by an amount
    that does not depend on the row.
    """
    A = mobius_A(a)
    p = np.exp(math.pi * A / M)
    m = np.arange(M)
    sinh_pa = np.sinh(math.pi * A)
    return sinh_pa * (1 + p) / (p * p - 1) + np.exp(-math.pi * A * m / M) * (np.exp(math.pi * A) - 1) / (1 - p)


def nontriviality_check(M: int, a: float) -> NontrivialityReport:
    """Equal weights at the ``n = 1`` reference angles give row sums that differ with ``m``."""
    if M < 2:
        raise DomainError("need M >= 2")
    angles = reference_angles(SpiralConfig(M, 1))
    direct = build_A(a, angles).sum(axis=1)
    closed = row_sums_closed(M, a)
    agreement = float(np.max(np.abs(direct - closed)) / np.max(np.abs(direct)))
    gaps = [abs(direct[i] - direct[j]) for i in range(M) for j in range(i)]
    return NontrivialityReport(direct, closed, agreement, float(min(gaps)))


# -- continuation ------------------------------------------------------------

@dataclass(frozen=True)
class BranchSample:
    a: float
    angles: Angles
    gprime: np.ndarray
    g0: float
    mu: float
    residual: float
    theta_residual: float
    det2: float
    iterations: int

    @property
    def in_U(self) -> bool:
        return self.angles.in_U

    @property
    def family(self) -> SpiralFamily:
        return assemble_family(self.a, self.angles, self.g0, self.gprime, self.mu)


@dataclass
class Branch:
    cfg: SpiralConfig
    samples: list = field(default_factory=list)
    theta_minus1: Optional[np.ndarray] = None
    G_minus1: Optional[np.ndarray] = None
    gradient_source: str = ""
    complete: bool = True
    stop_reason: Optional[str] = None

    @property
    def last_good_a(self) -> Optional[float]:
        return self.samples[-1].a if self.samples else None


def a_grid(a_start: float, a_end: float, steps: Optional[int] = None,
           per_decade: int = 40) -> np.ndarray:
    """Geometric grid from ``a_start`` down to ``a_end`` (uniform in ``log(1/a)``)."""
    if not (a_start > 0 and a_end > 0) or a_end > a_start:
        raise DomainError("need a_start >= a_end > 0")
    if a_start == a_end:
        return np.array([float(a_start)])
    if steps is None:
        steps = max(1, math.ceil(per_decade * math.log10(a_start / a_end)))
    grid = a_start * (a_end / a_start) ** (np.arange(steps + 1) / steps)
    grid[-1] = a_end
    return grid


def continue_branch(cfg: SpiralConfig, a_start: float = 1e6, a_end: float = 1e2,
                    steps: Optional[int] = None,
                    settings: NewtonSettings = NewtonSettings(),
                    li_tol: float = LI_TOL) -> Branch:
    """Follow the root of ``F(a, .) = 0`` from ``a_start`` down to ``a_end``.

    Stops early (``complete=False``) on Newton failure, a vanishing weight
    or dependent ``E1``, ``E2``; the samples gathered so far are kept.
    """
    check_nondegenerate(cfg)
    exp1 = expansion(cfg)
    branch = Branch(cfg, theta_minus1=exp1.theta_minus1, G_minus1=exp1.G_minus1,
                    gradient_source=exp1.gradient_source)
    grid = a_grid(a_start, a_end, steps)
    ref = reference_angles(cfg).theta
    theta = ref + exp1.theta_minus1 / grid[0]
    for a in grid:
        a = float(a)
        try:
            sol = newton_solve(a, theta, settings)
            H = solve_gprime(a, sol.angles)
            if np.max(np.abs(H.imag)) > 10 * settings.tol:
                raise NoConvergence("weight ratios are not real")
            pair = solve_g0_mu(a, sol.angles, H.real, li_tol)
            g = np.concatenate(([pair.g0], pair.g0 * H.real))
            if np.min(np.abs(g)) < G_MIN:
                raise NoSolution(f"a weight vanishes (min |g| = {np.min(np.abs(g)):.3e})")
        except SpiralError as exc:
            branch.complete = False
            branch.stop_reason = f"{type(exc).__name__} at a={a:.17g}: {exc}"
            break
        fam = assemble_family(a, sol.angles, pair.g0, H.real, pair.mu)
        branch.samples.append(BranchSample(
            a=a, angles=sol.angles, gprime=H.real.copy(), g0=pair.g0, mu=pair.mu,
            residual=fam.residual, theta_residual=sol.residual, det2=pair.det2,
            iterations=sol.iterations))
        theta = sol.angles.theta
    return branch
