"""Endpoint-singular quadrature, the arithmetic-geometric mean and K(k^2).

:func:`integrate_singular` is a tanh-sinh (double exponential) rule with
step halving.  Integrands are evaluated on numpy arrays.  Integrands that are
singular at a nonzero endpoint lose accuracy once ``x`` rounds to that endpoint,
so they can ask for the distances to both endpoints instead::

    integrate_singular(lambda x, da, db: 1 / np.sqrt(db * (1 + x)), 0, 1,
                       with_distances=True)

where ``da = x - a`` and ``db = b - x`` are computed directly from the
transformation and keep full relative precision near the ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

HALF_PI = 0.5 * math.pi

DEFAULT_TOL = 1e-10
MAX_LEVELS = 12
MIN_LEVEL = 4
T_MAX = 4.5

AGM_RTOL = 1e-15


class QuadratureError(ArithmeticError):
    """Raised when the refinement does not reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _level_nodes(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Abscissae ``t``, unit weights and endpoint complements for one level.

    Level 0 holds the integer multiples of ``h = 1`` in ``[-T_MAX, T_MAX]``,
    level ``k > 0`` only the odd multiples of ``2**-k``.
    """
    h = 2.0**-level
    kmax = int(math.floor(T_MAX / h))
    if level == 0:
        k = np.arange(-kmax, kmax + 1)
    else:
        k = np.arange(-kmax, kmax + 1)
        k = k[k % 2 != 0]
    t = k * h
    u = HALF_PI * np.sinh(t)
    e = np.exp(-2.0 * np.abs(u))
    # 1 - |tanh(u)| and sech(u)**2 without overflow
    comp = 2.0 * e / (1.0 + e)
    weight = HALF_PI * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
    return t, weight, comp


_NODE_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _nodes(level: int):
    if level not in _NODE_CACHE:
        _NODE_CACHE[level] = _level_nodes(level)
    return _NODE_CACHE[level]


def integrate_singular(
    f: Callable[..., np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    atol: float = 0.0,
    max_levels: int = MAX_LEVELS,
    with_distances: bool = False,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` with the tanh-sinh rule.

    Parameters
    ----------
    f : callable
        Vectorised integrand ``f(x)``, or ``f(x, da, db)`` when
        ``with_distances`` is set.
    a, b : float
        Finite limits with ``a < b``.
    tol : float
        Relative tolerance on the difference of successive levels.
    atol : float
        Absolute floor for the same test (useful for integrals near zero).
    max_levels : int
        Number of step halvings, starting from ``h = 1``.

    Returns
    -------
    QuadratureResult
        ``error_estimate`` is the last level difference plus an estimate of
        the tail beyond the outermost usable nodes.

    Raises
    ------
    QuadratureError
        If the estimate still exceeds ``10 * tol`` (relative) at the last level.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ValueError(f"need finite a < b, got [{a}, {b}]")
    half = 0.5 * (b - a)
    length = b - a

    total = 0.0
    prev = math.nan
    evaluations = 0
    err = math.inf
    tail = 0.0
    value = math.nan
    for level in range(max_levels):
        t, weight, comp = _nodes(level)
        left = t <= 0.0
        da = np.where(left, half * comp, length - half * comp)
        db = np.where(left, length - half * comp, half * comp)
        da = np.where(t == 0.0, half, da)
        db = np.where(t == 0.0, half, db)
        x = np.where(left, a + da, b - db)
        if with_distances:
            keep = (da > 0.0) & (db > 0.0)
        else:
            keep = (x > a) & (x < b)
        x, da, db, weight, t = x[keep], da[keep], db[keep], weight[keep], t[keep]
        fx = f(x, da, db) if with_distances else f(x)
        fx = np.broadcast_to(np.asarray(fx, dtype=float), x.shape)
        evaluations += x.size
        contrib = weight * fx
        total += float(np.sum(contrib))
        h = 2.0**-level
        value = half * h * total
        if level == 0:
            prev = value
            continue
        err = abs(value - prev)
        prev = value
        if x.size:
            # tail beyond the outermost node on each side, assuming the
            # contribution keeps decaying at the rate of the node density
            tail = 0.0
            for idx in (int(np.argmin(t)), int(np.argmax(t))):
                tail += half * abs(contrib[idx]) / (HALF_PI * math.cosh(t[idx]))
        if not math.isfinite(value):
            break
        if level >= MIN_LEVEL and err <= max(tol * abs(value), atol):
            break

    estimate = float(err + tail)
    if not math.isfinite(value) or estimate > max(10.0 * tol * abs(value), 10.0 * atol):
        raise QuadratureError(
            f"tanh-sinh did not converge on [{a}, {b}]: value={value!r}, "
            f"estimate={estimate:.3e}",
            value,
            estimate,
        )
    return QuadratureResult(value=value, error_estimate=estimate, evaluations=evaluations)


def _agm_iterate(x: float, y: float) -> tuple[float, int]:
    x = float(x)
    y = float(y)
    if not (x > 0.0 and y > 0.0) or not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"agm needs positive finite arguments, got ({x}, {y})")
    a, b = max(x, y), min(x, y)
    n = 0
    while abs(a - b) > AGM_RTOL * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        n += 1
        if n > 100:
            raise ArithmeticError("agm iteration failed to converge")
    return a, n


def agm(x: float, y: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    return _agm_iterate(x, y)[0]


def agm_iterations(x: float, y: float) -> int:
    """Number of AGM steps taken before the stopping test passes."""
    return _agm_iterate(x, y)[1]


def elliptic_K(k2: float) -> float:
    """Complete elliptic integral of the first kind, parameter ``k2 = k**2``.

    ``K(k2) = (pi/2) / AGM(1, sqrt(1 - k2))``.
    """
    k2 = float(k2)
    if not 0.0 <= k2 < 1.0:
        raise ValueError(f"elliptic_K needs 0 <= k2 < 1, got {k2!r}")
    return HALF_PI / agm(1.0, math.sqrt(1.0 - k2))


def cubic_root_integral(tau: float, tol: float = 1e-12) -> QuadratureResult:
    """``int_1^tau dy / (sqrt(y) sqrt(y-1) sqrt(tau-y))`` by quadrature."""

    def f(y, da, db):
        return 1.0 / np.sqrt(y * da * db)

    return integrate_singular(f, 1.0, tau, tol, with_distances=True)


def cubic_root_integral_agm(tau: float) -> float:
    """Closed form of :func:`cubic_root_integral`: ``(2/sqrt(tau)) K(1 - 1/tau)``."""
    return 2.0 / math.sqrt(tau) * elliptic_K(1.0 - 1.0 / tau)
