"""Periodic solutions ``w(theta)`` of ``w'' + beta**2 w - lam / w**p = 0`` on the circle."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .classify import Kind, classify, is_even_natural
from .params import OrbitSpec, ProblemParams, g, make_orbit, phase_constant_E0, w_min_of_tau
from .period import half_period, tau_for_period

DEFAULT_N = 2048
STEPS_PER_HALF_PERIOD = 4096
RESIDUAL_TOL = 1e-6
MIN_RESIDUAL_N = 16


class FrequencyNotAdmissible(ValueError):
    """The requested frequency is not one of the classified components."""


class IntegratorFailure(ArithmeticError):
    """The orbit left ``w > 0`` during integration."""


@dataclass(frozen=True)
class OrbitProfile:
    """A solution sampled on ``n`` uniform points of ``[0, 2 pi)``.

    ``frequency`` is ``j`` for the ``2 pi / j`` periodic solution and 0 for
    the constant profile and for members of the ``p == 3`` family.
    """

    thetas: np.ndarray
    values: np.ndarray
    orbit: OrbitSpec
    frequency: int
    params: ProblemParams
    residual_sup: float = math.nan

    @property
    def n(self) -> int:
        return self.values.size

    def shifted(self, steps: int) -> OrbitProfile:
        """Profile rotated by ``steps`` grid cells, ``w(theta + steps * h)``."""
        return replace(self, values=np.roll(self.values, -steps))

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta", "w"])
        for th, w in zip(self.thetas, self.values):
            writer.writerow([f"{th:.17g}", f"{w:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def uniform_grid(n: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n) / n


def _rhs(state: np.ndarray, beta2: float, lam: float, p: float) -> np.ndarray:
    w, dw = state
    if w <= 0.0:
        raise IntegratorFailure(f"w left (0, inf): w={w!r}")
    return np.array([dw, -beta2 * w + lam * w ** (-p)])


# Dormand-Prince 5th order tableau, used here as a fixed-step method
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])


def _rk_step(state: np.ndarray, h: float, args) -> np.ndarray:
    ks = []
    for i in range(6):
        inc = state.copy()
        for a, k in zip(_A[i], ks):
            inc = inc + h * a * k
        ks.append(_rhs(inc, *args))
    out = state.copy()
    for b, k in zip(_B, ks):
        out = out + h * b * k
    return out


def integrate_half_branch(w1: float, length: float, params: ProblemParams, steps: int):
    """Fixed-step integration from ``(w1, 0)`` over ``[0, length]``.

    Returns node positions and the states ``(w, w')`` at every step.
    """
    args = (params.beta**2, params.lam, params.p)
    h = length / steps
    states = np.empty((steps + 1, 2))
    states[0] = (w1, 0.0)
    for i in range(steps):
        states[i + 1] = _rk_step(states[i], h, args)
        if states[i + 1, 0] <= 0.0:
            raise IntegratorFailure(f"w left (0, inf) at step {i + 1}")
    return np.linspace(0.0, length, steps + 1), states


def _hermite_quintic(nodes: np.ndarray, states: np.ndarray, params: ProblemParams, x: np.ndarray) -> np.ndarray:
    """Interpolate ``w`` at ``x`` from values, slopes and curvatures at the nodes."""
    h = nodes[1] - nodes[0]
    idx = np.clip(((x - nodes[0]) / h).astype(int), 0, nodes.size - 2)
    s = (x - nodes[idx]) / h
    w0, d0 = states[idx, 0], states[idx, 1]
    w1, d1 = states[idx + 1, 0], states[idx + 1, 1]
    beta2, lam, p = params.beta**2, params.lam, params.p
    c0 = -beta2 * w0 + lam * w0 ** (-p)
    c1 = -beta2 * w1 + lam * w1 ** (-p)
    s2, s3 = s * s, s * s * s
    s4, s5 = s3 * s, s3 * s2
    h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h10 = s - 6 * s3 + 8 * s4 - 3 * s5
    h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5
    h01 = 10 * s3 - 15 * s4 + 6 * s5
    h11 = -4 * s3 + 7 * s4 - 3 * s5
    h21 = 0.5 * s3 - s4 + 0.5 * s5
    return h00 * w0 + h * h10 * d0 + h * h * h20 * c0 + h01 * w1 + h * h11 * d1 + h * h * h21 * c1


# central-difference weights for offsets 1, 2, ...; the second-difference
# weights multiply w[i+k] - 2 w[i] + w[i-k], which vanishes exactly on constants
_D1 = {
    2: (0.5,),
    4: (2 / 3, -1 / 12),
    6: (3 / 4, -3 / 20, 1 / 60),
    8: (4 / 5, -1 / 5, 4 / 105, -1 / 280),
}
_D2 = {
    2: (1.0,),
    4: (4 / 3, -1 / 12),
    6: (3 / 2, -3 / 20, 1 / 90),
    8: (8 / 5, -1 / 5, 8 / 315, -1 / 560),
}

#: stencil order used by :func:`residual` unless asked otherwise
RESIDUAL_ORDER = 8


def periodic_d1(w: np.ndarray, dtheta: float, order: int = 2) -> np.ndarray:
    """Centered first derivative on a uniform periodic grid."""
    out = np.zeros_like(w)
    for k, c in enumerate(_D1[order], start=1):
        out += c * (np.roll(w, -k) - np.roll(w, k))
    return out / dtheta


def periodic_d2(w: np.ndarray, dtheta: float, order: int = 2) -> np.ndarray:
    """Centered second difference on a uniform periodic grid."""
    out = np.zeros_like(w)
    for k, c in enumerate(_D2[order], start=1):
        out += c * ((np.roll(w, -k) - w) + (np.roll(w, k) - w))
    return out / dtheta**2


def discrete_residual(w: np.ndarray, params: ProblemParams, order: int = 2) -> np.ndarray:
    """Pointwise ``D2 w + beta**2 w - lam w**(-p)`` on the periodic grid of ``w``."""
    d2 = periodic_d2(w, 2.0 * math.pi / w.size, order)
    return d2 + params.beta**2 * w - params.lam * w ** (-params.p)


def residual(profile: OrbitProfile, order: int = RESIDUAL_ORDER) -> float:
    """Sup over the periodic grid of the ODE residual with an ``order`` stencil.

    The three-point stencil (``order=2``) carries an ``h**2 w''''/12`` term
    that dominates for large amplitude ratios; the default is the
    eighth-order centered difference.
    """
    w = profile.values
    if w.size < MIN_RESIDUAL_N:
        raise ValueError(f"residual needs n >= {MIN_RESIDUAL_N}, got {w.size}")
    return float(np.max(np.abs(discrete_residual(w, profile.params, order))))


def residual_on_window(func, params: ProblemParams, lo: float, hi: float, n: int = DEFAULT_N,
                       order: int = RESIDUAL_ORDER) -> float:
    """Sup of the ODE residual of an explicit ``func(theta)`` over ``[lo, hi]``.

    For candidate solutions that are not periodic or not positive on the whole
    circle; ``func`` is sampled ``order // 2`` steps beyond each end.
    """
    dtheta = (hi - lo) / n
    pad = order // 2
    theta = lo + dtheta * np.arange(-pad, n + pad + 1)
    w = np.asarray(func(theta), dtype=float)
    mid = w[pad:-pad]
    d2 = np.zeros_like(mid)
    for k, c in enumerate(_D2[order], start=1):
        d2 += c * ((w[pad + k: w.size - pad + k] - mid) + (w[pad - k: w.size - pad - k] - mid))
    d2 /= dtheta**2
    return float(np.max(np.abs(d2 + params.beta**2 * mid - params.lam * mid ** (-params.p))))


def _finish(profile: OrbitProfile) -> OrbitProfile:
    return replace(profile, residual_sup=residual(profile))


def sample_orbit(tau: float, params: ProblemParams, n: int, *, n_periods: int = 1,
                 period_length: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sample the orbit of ratio ``tau`` on ``n`` uniform points of ``n_periods`` periods.

    The minimum sits at ``theta = 0``.  Used both for circle profiles (where
    ``n_periods`` is the frequency) and for orbits whose period is not a
    divisor of ``2 pi``.
    """
    L = half_period(tau, params) if period_length is None else 0.5 * period_length
    w1 = w_min_of_tau(tau, params)
    nodes, states = integrate_half_branch(w1, L, params, STEPS_PER_HALF_PERIOD)
    theta = 2.0 * L * n_periods * np.arange(n) / n
    phase = np.mod(theta, 2.0 * L)
    phase = np.where(phase > L, 2.0 * L - phase, phase)
    return theta, _hermite_quintic(nodes, states, params, phase)


def build_profile(j: int, params: ProblemParams, n: int = DEFAULT_N) -> OrbitProfile:
    """The ``2 pi / j`` periodic solution, minimum at ``theta = 0``."""
    if params.p == 3.0:
        raise FrequencyNotAdmissible("p == 3: use p3_family for the nontrivial solutions")
    desc = classify(params)
    if j not in desc.frequencies:
        raise FrequencyNotAdmissible(
            f"frequency {j} not admissible for alpha={params.alpha}, p={params.p}; "
            f"admissible: {list(desc.frequencies)}"
        )
    tau = tau_for_period(math.pi / j, params)
    w1 = w_min_of_tau(tau, params)
    orbit = OrbitSpec(tau=tau, w1=w1, w2=tau * w1, phase_constant=g(w1, params),
                      half_period=math.pi / j)
    _, values = sample_orbit(tau, params, n, n_periods=j, period_length=2.0 * math.pi / j)
    return _finish(OrbitProfile(uniform_grid(n), values, orbit, j, params))


def trivial_profile(params: ProblemParams, n: int = DEFAULT_N) -> OrbitProfile:
    """The constant solution ``m0``."""
    orbit = make_orbit(1.0, params)
    values = np.full(n, params.m0)
    return _finish(OrbitProfile(uniform_grid(n), values, orbit, 0, params))


def p3_family(eps: float, a: float, params: ProblemParams, n: int = DEFAULT_N) -> OrbitProfile:
    """Closed-form member ``w_{eps,a}`` of the ``p == 3`` continuum.

    ``w = m0 * sqrt(eps cos^2(beta (theta + a)) + sin^2(beta (theta + a)) / eps)``.
    """
    if params.p != 3.0:
        raise ValueError("p3_family requires p == 3")
    if not is_even_natural(params.alpha):
        raise ValueError(f"p3_family requires alpha in 2N, got {params.alpha}")
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps!r}")
    thetas = uniform_grid(n)
    phase = params.beta * (thetas + a)
    values = params.m0 * np.sqrt(eps * np.cos(phase) ** 2 + np.sin(phase) ** 2 / eps)
    tau = 1.0 / eps
    w1 = params.m0 * math.sqrt(eps)
    orbit = OrbitSpec(tau=tau, w1=w1, w2=tau * w1, phase_constant=g(w1, params),
                      half_period=2.0 * math.pi / (params.alpha + 2.0))
    return _finish(OrbitProfile(thetas, values, orbit, 0, params))


def measured_half_period(profile: OrbitProfile) -> float:
    """Distance between the first minimum and the following maximum.

    Extrema are located to sub-grid accuracy by a parabola through the three
    samples around each discrete extremum.
    """
    w = profile.values
    n = w.size
    dtheta = 2.0 * math.pi / n

    def refine(k: int) -> float:
        wm, w0, wp = w[(k - 1) % n], w[k], w[(k + 1) % n]
        denom = wm - 2.0 * w0 + wp
        off = 0.0 if denom == 0.0 else 0.5 * (wm - wp) / denom
        return (k + off) * dtheta

    k_min = int(np.argmin(w))
    span = n // max(profile.frequency, 1)
    window = np.arange(k_min, k_min + span) % n
    k_max = int(window[np.argmax(w[window])])
    d = refine(k_max) - refine(k_min)
    return d % (2.0 * math.pi)
