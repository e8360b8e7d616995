"""Parameter triple and the closed-form scalars of the angular problem.

The angular equation is ``w'' + beta**2 w - lam / w**p = 0`` on the circle with
``beta = (alpha + 2) / (p + 1)``.  Everything here is a pure function of a
:class:`ProblemParams` instance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

#: below this value of ``tau - 1`` the analytic limits at ``tau = 1`` are used
TAU_LIMIT_THRESHOLD = 1e-6

#: relative distance of ``p`` from 1 that triggers an ill-conditioning warning
P_NEAR_ONE = 1e-8


class IllConditionedWarning(RuntimeWarning):
    """``p`` is within :data:`P_NEAR_ONE` of 1 but not equal to it."""


@dataclass(frozen=True)
class ProblemParams:
    """The triple ``(alpha, p, lam)`` with the derived ``beta`` and ``m0``.

    ``m0 = (lam / beta**2) ** (1 / (p + 1))`` is the constant (trivial)
    solution of the angular equation.
    """

    alpha: float
    p: float
    lam: float = 1.0
    beta: float = field(init=False, repr=False)
    m0: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        alpha, p, lam = float(self.alpha), float(self.p), float(self.lam)
        if not (math.isfinite(alpha) and alpha > -2.0):
            raise ValueError(f"alpha must be > -2, got {self.alpha!r}")
        if not (math.isfinite(p) and p > 0.0):
            raise ValueError(f"p must be > 0, got {self.p!r}")
        if not (math.isfinite(lam) and lam > 0.0):
            raise ValueError(f"lambda must be > 0, got {self.lam!r}")
        if p != 1.0 and abs(p - 1.0) < P_NEAR_ONE:
            warnings.warn(
                f"p={p!r} is within {P_NEAR_ONE} of 1; formulas with (p-1) "
                "denominators are ill-conditioned",
                IllConditionedWarning,
                stacklevel=3,
            )
        beta = (alpha + 2.0) / (p + 1.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "m0", (lam / beta**2) ** (1.0 / (p + 1.0)))

    def with_lambda(self, lam: float) -> ProblemParams:
        return ProblemParams(self.alpha, self.p, lam)


@dataclass(frozen=True)
class OrbitSpec:
    """A phase-plane orbit identified by its amplitude ratio ``tau = w2 / w1``."""

    tau: float
    w1: float
    w2: float
    phase_constant: float
    half_period: float


def _positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise ValueError(f"{name} must be > 0")
    return arr


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def lnq1p(x, p: float):
    """Generalised logarithm of ``1 + x``: ``((1+x)**(1-p) - 1) / (1-p)``.

    Reduces to ``log1p(x)`` at ``p == 1``.  Evaluated without cancellation for
    small ``x``.
    """
    x = np.asarray(x, dtype=float)
    if p == 1.0:
        return np.log1p(x)
    return np.expm1((1.0 - p) * np.log1p(x)) / (1.0 - p)


def lnq1p_over_x(x, p: float):
    """``lnq1p(x, p) / x`` with the removable singularity at ``x = 0`` filled."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = lnq1p(x, p) / x
    return np.where(x == 0.0, 1.0, out)


def zeta(tau, p: float):
    """``(tau**2 - 1) / lnq(tau)``; tends to 2 as ``tau -> 1``.

    For ``p != 1`` this equals ``(p-1) tau**(p-1) (tau**2-1) / (tau**(p-1)-1)``,
    the coefficient that makes ``y = 1`` and ``y = tau`` both roots of the
    normalised level-set function.
    """
    t1 = np.asarray(tau, dtype=float) - 1.0
    return (t1 + 2.0) / lnq1p_over_x(t1, p)


def h(x, params: ProblemParams):
    """Potential term: ``lam / ((p-1) x**(p-1))``, or ``-lam log x`` at ``p == 1``."""
    x = _positive(x, "x")
    p, lam = params.p, params.lam
    if p == 1.0:
        out = -lam * np.log(x)
    else:
        out = lam / ((p - 1.0) * x ** (p - 1.0))
    return _scalar_or_array(out)


def g(w, params: ProblemParams):
    """Level-set function ``beta**2 w**2 + 2 h(w)``; minimum at ``m0``."""
    w = _positive(w, "w")
    return _scalar_or_array(params.beta**2 * w**2 + 2.0 * np.asarray(h(w, params)))


def phase_constant_E0(params: ProblemParams) -> float:
    """``g(m0)``, the phase constant of the trivial orbit."""
    p, lam, beta = params.p, params.lam, params.beta
    if p == 1.0:
        return lam * (1.0 - math.log(lam / beta**2))
    return (p + 1.0) / (p - 1.0) * lam ** (2.0 / (p + 1.0)) * beta ** (2.0 * (p - 1.0) / (p + 1.0))


def w_min_of_tau(tau: float, params: ProblemParams) -> float:
    """Orbit minimum ``w1`` as a function of the amplitude ratio ``tau``.

    ``w1**(p+1) = 2 lam (1 - tau**(1-p)) / (beta**2 (p-1) (tau**2-1))`` for
    ``p != 1`` and ``w1**2 = 2 lam log(tau) / (beta**2 (tau**2-1))`` at ``p == 1``;
    both are ``m0 * (2 / zeta(tau)) ** (1/(p+1))``.
    """
    tau = float(tau)
    if not tau >= 1.0:
        raise ValueError(f"tau must be >= 1, got {tau!r}")
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        return params.m0
    return params.m0 * (2.0 / float(zeta(tau, params.p))) ** (1.0 / (params.p + 1.0))


def ode_rhs_Q(w, params: ProblemParams):
    """Right-hand side ``Q(w) = -beta**2 w + lam / w**p`` of ``w'' = Q(w)``."""
    w = _positive(w, "w")
    return _scalar_or_array(-params.beta**2 * w + params.lam * w ** (-params.p))


def make_orbit(tau: float, params: ProblemParams) -> OrbitSpec:
    """Build the :class:`OrbitSpec` for amplitude ratio ``tau``."""
    from .period import half_period

    w1 = w_min_of_tau(tau, params)
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        E = phase_constant_E0(params)
    else:
        E = g(w1, params)
    return OrbitSpec(
        tau=float(tau),
        w1=w1,
        w2=float(tau) * w1,
        phase_constant=E,
        half_period=half_period(tau, params),
    )
