"""Energy of solutions on the circle and its dependence on the amplitude ratio.

For a solution ``w`` of the angular equation the functional

    E(w) = int_{S^1} (w')**2 / 2 - beta**2 w**2 / 2 - h(w) dtheta

reduces to a multiple of the normalised mean ``F`` of ``(m0 / w)**(p-1)``
(``p != 1``) or to the mean ``F1`` of ``log(w / m0)`` (``p == 1``), and both
depend on ``tau`` and ``p`` only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import classify
from .params import TAU_LIMIT_THRESHOLD, ProblemParams, h, zeta
from .period import PERIOD_TOL, half_period, kernel_tol, orbit_kernel, tau_for_period
from .profile import OrbitProfile, build_profile, periodic_d1, sample_orbit
from .quadrature import integrate_singular


#: centered-difference order for the derivative in the energy functional
ENERGY_ORDER = 8


class InadmissibleComponent(ValueError):
    """No solution component with the requested frequency."""


@dataclass(frozen=True)
class EnergyReport:
    tau: float
    F: float
    H: float
    E_via_F: float
    E_direct: float
    L: float


def energy_density(values: np.ndarray, dtheta: float, params: ProblemParams, order: int = ENERGY_ORDER) -> np.ndarray:
    dw = periodic_d1(values, dtheta, order)
    return 0.5 * dw**2 - 0.5 * params.beta**2 * values**2 - np.asarray(h(values, params))


def energy_functional(profile: OrbitProfile, order: int = ENERGY_ORDER) -> float:
    """Trapezoidal value of ``E`` on the periodic grid.

    The trapezoidal rule is spectrally accurate for periodic integrands, so
    the error is set by the centered derivative; ``order=2`` gives the plain
    second-order scheme, the default eighth-order stencil keeps large
    amplitude ratios within ``1e-5``.
    """
    w = profile.values
    if w.size < 64:
        raise ValueError("energy_functional needs n >= 64")
    dtheta = 2.0 * math.pi / w.size
    return float(np.sum(energy_density(w, dtheta, profile.params, order)) * dtheta)


def orbit_energy_direct(tau: float, params: ProblemParams, n: int = 4096, order: int = ENERGY_ORDER) -> float:
    """``E`` of the orbit with ratio ``tau`` from its sampled profile.

    The functional is averaged over one full period ``2 L`` and scaled to the
    circle length, which is the circle integral whenever ``2 L = 2 pi / j``.
    """
    L = half_period(tau, params)
    _, values = sample_orbit(tau, params, n)
    dtheta = 2.0 * L / n
    return float(2.0 * math.pi * np.mean(energy_density(values, dtheta, params, order)))


def _H_integrand(tau: float, p: float):
    _, weight = orbit_kernel(tau, p)
    t1 = tau - 1.0
    # (w1 / m0) ** (1 - p)
    amp = (2.0 / float(zeta(tau, p))) ** ((1.0 - p) / (p + 1.0))

    def f(xi, da, db):
        lower = da <= db
        y_pow = np.where(lower, np.exp((1.0 - p) * np.log1p(da * t1)), (tau - db * t1) ** (1.0 - p))
        return amp * y_pow * weight(xi, da, db)

    return f


def H_of_tau(tau: float, params: ProblemParams, tol: float = PERIOD_TOL) -> float:
    """Numerator integral ``H(tau)`` of ``F``; depends on ``tau`` and ``p`` only."""
    p = params.p
    if p == 1.0:
        raise ValueError("H is defined for p != 1")
    tau = float(tau)
    if not tau > 1.0:
        raise ValueError(f"H needs tau > 1, got {tau!r}")
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        return math.pi / math.sqrt(p + 1.0)
    return integrate_singular(_H_integrand(tau, p), 0.0, 1.0, kernel_tol(tau, tol), with_distances=True).value


def H_of_tau_yform(tau: float, params: ProblemParams, nodes: int = 400) -> float:
    """``H`` from the ``y``-integral with ``I = (z(tau) - z(y)) (1 - y**(1-p))``.

    Independent of :func:`H_of_tau`: substitutes ``y = (tau+1)/2 - (tau-1)/2 cos(phi)``
    to absorb the square-root endpoint factors and applies Gauss-Legendre in
    ``phi`` to the smooth remainder.
    """
    p = params.p
    if p == 1.0:
        raise ValueError("H is defined for p != 1")
    tau = float(tau)

    def z(y):
        return y ** (p - 1.0) * (y * y - 1.0) / (y ** (p - 1.0) - 1.0)

    x, wts = np.polynomial.legendre.leggauss(nodes)
    phi = 0.5 * math.pi * (x + 1.0)
    wts = 0.5 * math.pi * wts
    y = 0.5 * (tau + 1.0) - 0.5 * (tau - 1.0) * np.cos(phi)
    slope_z = (z(tau) - z(y)) / (tau - y)
    slope_pow = (y ** (p - 1.0) - 1.0) / (y ** (p - 1.0) * (y - 1.0))
    amp = (2.0 * (1.0 - tau ** (1.0 - p)) / ((p - 1.0) * (tau * tau - 1.0))) ** ((1.0 - p) / (p + 1.0))
    return float(amp * np.sum(wts / (y ** (p - 1.0) * np.sqrt(slope_z * slope_pow))))


def F_of_tau(tau: float, params: ProblemParams) -> float:
    """``F(tau) = H(tau) / (beta L(tau))``; exactly 1 in the ``tau -> 1`` limit branch."""
    p = params.p
    if p == 1.0:
        raise ValueError("F is defined for p != 1; use F1_of_tau")
    tau = float(tau)
    if not tau >= 1.0:
        raise ValueError(f"tau must be >= 1, got {tau!r}")
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        return 1.0
    _, weight = orbit_kernel(tau, p)
    tol = kernel_tol(tau)
    num = integrate_singular(_H_integrand(tau, p), 0.0, 1.0, tol, with_distances=True).value
    den = integrate_singular(weight, 0.0, 1.0, tol, with_distances=True).value
    return num / den


def _F1_parts(tau: float) -> tuple[float, float]:
    """Numerator and denominator (``beta L``) of ``F1`` at ``p == 1``."""
    _, weight = orbit_kernel(tau, 1.0)
    t1 = tau - 1.0
    shift = 0.5 * math.log(2.0 / float(zeta(tau, 1.0)))

    def f(xi, da, db):
        log_y = np.where(da <= db, np.log1p(da * t1), np.log(tau - db * t1))
        return (shift + log_y) * weight(xi, da, db)

    tol = kernel_tol(tau)
    num = integrate_singular(f, 0.0, 1.0, tol, atol=1e-14, with_distances=True).value
    den = integrate_singular(weight, 0.0, 1.0, tol, with_distances=True).value
    return num, den


def F1_of_tau(tau: float, params: ProblemParams) -> float:
    """Mean of ``log(w / m0)`` over the orbit of ratio ``tau`` (``p == 1``)."""
    if params.p != 1.0:
        raise ValueError("F1 is defined for p == 1 only")
    tau = float(tau)
    if not tau >= 1.0:
        raise ValueError(f"tau must be >= 1, got {tau!r}")
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        return 0.0
    num, den = _F1_parts(tau)
    return num / den


def H_limit(p: float) -> float:
    """``lim H(tau)`` as ``tau -> inf`` for ``0 < p < 1``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"H(+inf) is finite only for 0 < p < 1, got {p!r}")

    # xi**(1-p) / sqrt(xi**(1-p) - xi**2) = xi**((1-p)/2) / sqrt(1 - xi**(1+p))
    def f(xi, da, db):
        one_minus = np.where(da <= db, -np.expm1((1.0 + p) * np.log(xi)), -np.expm1((1.0 + p) * np.log1p(-np.minimum(db, 0.5))))
        return xi ** (0.5 * (1.0 - p)) / np.sqrt(one_minus)

    integral = integrate_singular(f, 0.0, 1.0, 1e-13, with_distances=True).value
    return (2.0 / (1.0 - p)) ** ((1.0 - p) / (p + 1.0)) * integral


def C_of_p(p: float) -> float:
    """``lim F(tau)`` as ``tau -> inf`` for ``0 < p < 1``: ``(p+1)/pi * H(+inf)``."""
    return (p + 1.0) / math.pi * H_limit(p)


def energy_from_F(F: float, params: ProblemParams) -> float:
    """``E = pi lam (1+p)/(1-p) (lam/beta**2)**((1-p)/(p+1)) F`` for ``p != 1``."""
    p, lam = params.p, params.lam
    if p == 1.0:
        raise ValueError("use energy_from_F1 at p == 1")
    return math.pi * lam * (1.0 + p) / (1.0 - p) * params.m0 ** (1.0 - p) * F


def energy_from_F1(F1: float, params: ProblemParams) -> float:
    """``E = -pi lam + 2 pi lam log(m0) + 2 pi lam F1`` at ``p == 1``."""
    lam = params.lam
    return -math.pi * lam + 2.0 * math.pi * lam * math.log(params.m0) + 2.0 * math.pi * lam * F1


def energy_of_tau(tau: float, params: ProblemParams) -> float:
    """Energy of the orbit with amplitude ratio ``tau``."""
    if params.p == 1.0:
        return energy_from_F1(F1_of_tau(tau, params), params)
    return energy_from_F(F_of_tau(tau, params), params)


def trivial_energy(params: ProblemParams) -> float:
    """Closed-form energy of the constant solution ``m0``."""
    p, lam, a2 = params.p, params.lam, params.alpha + 2.0
    if p == 1.0:
        return -math.pi * lam + 2.0 * math.pi * lam * math.log(2.0 * math.sqrt(lam) / a2)
    if p == 3.0:
        return -math.pi * math.sqrt(lam) * a2 / 2.0
    return math.pi * lam * (1.0 + p) / (1.0 - p) * ((p + 1.0) ** 2 / a2**2 * lam) ** ((1.0 - p) / (p + 1.0))


def energy_report(tau: float, params: ProblemParams, n: int = 4096) -> EnergyReport:
    """Both routes to the energy of one orbit, plus the pieces of ``F``."""
    tau = float(tau)
    L = half_period(tau, params)
    if params.p == 1.0:
        if tau - 1.0 < TAU_LIMIT_THRESHOLD:
            F, Hval = 0.0, 0.0
        else:
            num, den = _F1_parts(tau)
            F, Hval = num / den, num * params.beta * L / den
        E_F = energy_from_F1(F, params)
    else:
        F = F_of_tau(tau, params)
        Hval = H_of_tau(tau, params) if tau - 1.0 >= TAU_LIMIT_THRESHOLD else params.beta * L
        E_F = energy_from_F(F, params)
    if tau - 1.0 < TAU_LIMIT_THRESHOLD:
        E_direct = trivial_energy(params)
    else:
        E_direct = orbit_energy_direct(tau, params, n)
    return EnergyReport(tau=tau, F=F, H=Hval, E_via_F=E_F, E_direct=E_direct, L=L)


def component_tau(j: int, params: ProblemParams) -> float:
    """Amplitude ratio of component ``j`` (``j == 0`` is the constant solution)."""
    if j == 0:
        return 1.0
    desc = classify(params)
    if j not in desc.frequencies:
        raise InadmissibleComponent(
            f"no component with frequency {j} at alpha={params.alpha}, p={params.p}; "
            f"admissible: {list(desc.frequencies)}"
        )
    return tau_for_period(math.pi / j, params)


def energy_on_component(j: int, params: ProblemParams, *, cross_check_n: int | None = None):
    """Energy of the component with frequency ``j`` (0 for the constant solution).

    With ``cross_check_n`` set, also returns the energy functional evaluated
    on :func:`build_profile` at that grid size, as ``(E, E_direct)``.
    """
    if params.p == 3.0 and j != 0:
        raise InadmissibleComponent("p == 3: the energy is the same on the whole continuum")
    tau = component_tau(j, params)
    E = trivial_energy(params) if j == 0 else energy_of_tau(tau, params)
    if cross_check_n is None:
        return E
    if j == 0:
        from .profile import trivial_profile

        prof = trivial_profile(params, cross_check_n)
    else:
        prof = build_profile(j, params, cross_check_n)
    return E, energy_functional(prof)


def component_energies(params: ProblemParams) -> list[tuple[int, float]]:
    """``[(0, E(S0)), (j1, E(S1)), ...]`` for every component."""
    desc = classify(params)
    out = [(0, energy_on_component(0, params))]
    for j in desc.frequencies:
        out.append((j, energy_on_component(j, params)))
    return out


def expected_direction(p: float) -> int:
    """+1 increasing, -1 decreasing, 0 constant: the sampled shape of F (or F1) in tau."""
    if p == 3.0:
        return 0
    if 1.0 < p < 3.0:
        return -1
    return 1


@dataclass
class SweepTable:
    params: ProblemParams
    column: str
    direction: int
    rows: list[tuple[float, float, float]] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)
    constancy_tol: float = 1e-9

    @property
    def evidence(self) -> str:
        return "sampled"

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tau", self.column, "E"])
        for row in self.rows:
            writer.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def monotonicity_sweep(params: ProblemParams, tau_grid) -> SweepTable:
    """Tabulate ``(tau, F or F1, E)`` and flag steps against the expected direction.

    The verdict is sampling evidence only: strictness is checked between
    consecutive grid points, constancy (``p == 3``) to ``1e-9`` relative.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size < 2 or taus[0] < 1.0 or np.any(np.diff(taus) <= 0.0):
        raise ValueError("tau_grid must be strictly increasing and start at >= 1")
    p = params.p
    column = "F1" if p == 1.0 else "F"
    table = SweepTable(params=params, column=column, direction=expected_direction(p))
    fvals = []
    for tau in taus:
        f = F1_of_tau(tau, params) if p == 1.0 else F_of_tau(tau, params)
        E = energy_from_F1(f, params) if p == 1.0 else energy_from_F(f, params)
        fvals.append(f)
        table.rows.append((float(tau), f, E))
    fvals = np.array(fvals)
    if table.direction == 0:
        bad = np.nonzero(np.abs(fvals - 1.0) > table.constancy_tol)[0]
        table.violations = [int(i) for i in bad]
    else:
        steps = np.diff(fvals) * table.direction
        table.violations = [int(i) + 1 for i in np.nonzero(steps <= 0.0)[0]]
    return table


def log_tau_grid(tau_min: float, tau_max: float, count: int) -> np.ndarray:
    """``count`` points from ``tau_min`` to ``tau_max``, log-spaced in ``tau``."""
    if not (1.0 <= tau_min < tau_max) or count < 2:
        raise ValueError("need 1 <= tau_min < tau_max and count >= 2")
    return np.geomspace(tau_min, tau_max, count)
