"""Minimal half-period ``L(tau)`` of the orbit with amplitude ratio ``tau``.

With ``y = w / w1`` and ``xi = (y - 1) / (tau - 1)``,

    beta * L(tau) = int_0^1 (tau - 1) / sqrt(R(xi)) dxi,
    R = 1 - y**2 + zeta(tau) * lnq(y),

where ``lnq`` is the generalised logarithm (``log`` at ``p == 1``).  ``R``
vanishes at both ends, so it is evaluated as ``s * B_lo(s)`` near ``y = 1``
(``s = y - 1``) and as ``u * B_hi(u)`` near ``y = tau`` (``u = tau - y``), with
``B_lo`` and ``B_hi`` free of the endpoint cancellation.
"""

from __future__ import annotations

import math

import numpy as np

from .params import TAU_LIMIT_THRESHOLD, ProblemParams, lnq1p_over_x, zeta
from .quadrature import integrate_singular

PERIOD_TOL = 1e-13
BISECTION_MAX_ITER = 60
TAU_SEARCH_MAX = 1e100


class PeriodRangeError(ValueError):
    """Target half-period outside the open range of ``L``."""


def orbit_kernel(tau: float, p: float):
    """Return ``(y, weight)`` callables of ``(xi, da, db)`` on ``[0, 1]``.

    ``weight`` is ``(tau - 1) / sqrt(R)``; its integral over ``[0, 1]`` is
    ``beta * L(tau)``.  ``y`` maps ``xi`` back to ``w / w1``.
    """
    tau = float(tau)
    t1 = tau - 1.0
    z = float(zeta(tau, p))

    def y_of(xi, da, db):
        return np.where(da <= db, 1.0 + da * t1, tau - db * t1)

    def weight(xi, da, db):
        lower = da <= db
        s = da * t1
        u = db * t1
        y = np.where(lower, 1.0 + s, tau - u)
        b_lo = z * lnq1p_over_x(s, p) - (2.0 + s)
        b_hi = (tau + y) - z * y ** (-p) * lnq1p_over_x(u / y, p)
        dist = np.where(lower, da, db)
        factor = np.where(lower, b_lo, b_hi)
        return math.sqrt(t1) / np.sqrt(dist * factor)

    return y_of, weight


def kernel_tol(tau: float, tol: float = PERIOD_TOL) -> float:
    """Attainable relative tolerance; the kernel loses ``eps / (tau - 1)`` near 1."""
    return max(tol, 4e-16 / (float(tau) - 1.0))


def beta_half_period(tau: float, p: float, tol: float = PERIOD_TOL) -> float:
    """``beta * L(tau)`` by quadrature; depends on ``p`` only."""
    _, weight = orbit_kernel(tau, p)
    return integrate_singular(weight, 0.0, 1.0, kernel_tol(tau, tol), with_distances=True).value


def period_limits(params: ProblemParams) -> tuple[float, float]:
    """``(L(1+), L(inf)) = (pi/(sqrt(p+1) beta), pi/(min(p+1, 2) beta))``."""
    p, beta = params.p, params.beta
    return math.pi / (math.sqrt(p + 1.0) * beta), math.pi / (min(p + 1.0, 2.0) * beta)


def half_period(tau: float, params: ProblemParams, *, exact_p3: bool = True) -> float:
    """Minimal half-period ``L(tau)``.

    Uses the analytic limit when ``tau - 1 < TAU_LIMIT_THRESHOLD`` and the
    isochronous value ``pi / (2 beta)`` at ``p == 3`` (unless ``exact_p3`` is
    false, in which case the quadrature is always run).
    """
    tau = float(tau)
    if not tau >= 1.0:
        raise ValueError(f"tau must be >= 1, got {tau!r}")
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        return period_limits(params)[0]
    if params.p == 3.0 and exact_p3:
        return math.pi / (2.0 * params.beta)
    return beta_half_period(tau, params.p) / params.beta


def tau_for_period(target_L: float, params: ProblemParams) -> float:
    """Amplitude ratio whose half-period equals ``target_L``.

    Bisection on ``log(tau - 1)``; ``L`` is strictly monotone in ``tau`` for
    ``p != 3``.
    """
    if params.p == 3.0:
        raise ValueError("p == 3 is isochronous: L(tau) is constant and has no inverse")
    lo_lim, hi_lim = period_limits(params)
    lo_val, hi_val = min(lo_lim, hi_lim), max(lo_lim, hi_lim)
    target_L = float(target_L)
    if not lo_val < target_L < hi_val:
        raise PeriodRangeError(
            f"target half-period {target_L!r} not inside ({lo_val!r}, {hi_val!r})"
        )
    p, beta = params.p, params.beta
    target = target_L * beta

    def resid(x: float) -> float:
        return beta_half_period(1.0 + math.exp(x), p) - target

    # L decreases in tau for p < 3 and increases for p > 3
    sign = -1.0 if p < 3.0 else 1.0
    x_lo = math.log(TAU_LIMIT_THRESHOLD)
    r_lo = resid(x_lo)
    while sign * r_lo > 0.0 and x_lo > math.log(1e-12):
        x_lo -= math.log(10.0)
        r_lo = resid(x_lo)
    x_hi = math.log(100.0)
    r_hi = resid(x_hi)
    while sign * r_hi < 0.0:
        if x_hi > math.log(TAU_SEARCH_MAX):
            raise PeriodRangeError(f"target half-period {target_L!r} needs tau > {TAU_SEARCH_MAX:g}")
        x_hi += 4.0 * math.log(10.0)
        r_hi = resid(x_hi)
    if sign * r_lo > 0.0:
        raise PeriodRangeError(f"target half-period {target_L!r} too close to L(1+)")

    for _ in range(BISECTION_MAX_ITER):
        x_mid = 0.5 * (x_lo + x_hi)
        r_mid = resid(x_mid)
        if r_mid == 0.0:
            x_lo = x_hi = x_mid
            break
        if sign * r_mid < 0.0:
            x_lo = x_mid
        else:
            x_hi = x_mid
        if x_hi - x_lo <= 1e-15 * max(1.0, abs(x_mid)):
            break
    return 1.0 + math.exp(0.5 * (x_lo + x_hi))
