"""Cross-module identity checks run by ``rupture verify``.

Each check returns a :class:`CheckResult`; none of them reads the clock or a
random source without a fixed seed, so reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .classify import Kind, classify, in_M_explicit
from .cylinder import flux_residual, solve_connection
from .energy import (
    component_energies,
    energy_functional,
    energy_of_tau,
    trivial_energy,
    F_of_tau,
    H_of_tau,
)
from .params import ProblemParams
from .period import half_period
from .profile import trivial_profile
from .quadrature import cubic_root_integral, cubic_root_integral_agm


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return asdict(self)


def check_dual_classification(n_points: int = 500, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(-1.99, 10.0, n_points)
    ps = rng.uniform(0.05, 12.0, n_points)
    bad = 0
    for a, p in zip(alphas, ps):
        trivial = classify((a, p)).kind is Kind.TRIVIAL_ONLY
        bad += trivial != in_M_explicit((a, p))
    fixtures_ok = (
        classify((1.2, 2.0)).frequencies == (2,)
        and classify((2.7, 2.0)).frequencies == (3,)
        and all(classify((0.0, p)).kind is Kind.TRIVIAL_ONLY for p in (0.5, 1.0, 2.0, 5.0))
    )
    return CheckResult("dual_classification", bad == 0 and fixtures_ok,
                       f"{bad} disagreements on {n_points} points; fixtures {'ok' if fixtures_ok else 'FAILED'}")


def check_elliptic_identity() -> CheckResult:
    worst = 0.0
    for tau in (1.5, 2.0, 10.0, 100.0):
        quad = cubic_root_integral(tau).value
        worst = max(worst, abs(quad / cubic_root_integral_agm(tau) - 1.0))
    return CheckResult("elliptic_identity", worst <= 1e-9, f"max relative gap {worst:.2e}")


def check_p3_constancy() -> CheckResult:
    worst = 0.0
    for alpha in (0.0, 2.0, 6.0):
        for lam in (0.5, 1.0, 4.0):
            params = ProblemParams(alpha, 3.0, lam)
            for tau in (1.5, 2.0, 10.0, 100.0):
                L = half_period(tau, params, exact_p3=False)
                worst = max(
                    worst,
                    abs(L / (2.0 * math.pi / (alpha + 2.0)) - 1.0),
                    abs(H_of_tau(tau, params) / (0.5 * math.pi) - 1.0),
                    abs(F_of_tau(tau, params) - 1.0),
                )
    return CheckResult("p3_constancy", worst <= 1e-8, f"max relative deviation {worst:.2e}")


def check_trivial_energies() -> CheckResult:
    worst = 0.0
    for p in (0.5, 1.0, 2.0, 3.0, 5.0):
        for alpha, lam in ((0.0, 1.0), (1.3, 2.5)):
            params = ProblemParams(alpha, p, lam)
            closed = trivial_energy(params)
            direct = energy_functional(trivial_profile(params, 256))
            limit = energy_of_tau(1.0 + 1e-8, params)
            worst = max(worst, abs(direct / closed - 1.0), abs(limit / closed - 1.0))
    return CheckResult("trivial_energies", worst <= 1e-10, f"max relative gap {worst:.2e}")


def check_energy_ladder() -> CheckResult:
    rising = [e for _, e in component_energies(ProblemParams(20.0, 2.0))]
    top = component_energies(ProblemParams(8.0, 5.0))
    ok_low = len(rising) >= 3 and all(b > a for a, b in zip(rising, rising[1:]))
    ok_high = len(top) >= 2 and all(top[0][1] > e for _, e in top[1:])
    return CheckResult("energy_ladder", ok_low and ok_high,
                       f"p=2 ladder {'increasing' if ok_low else 'NOT increasing'}; "
                       f"p=5 trivial {'maximal' if ok_high else 'NOT maximal'}")


def check_trivial_flux() -> CheckResult:
    params = ProblemParams(1.2, 2.0)
    prof = trivial_profile(params, 32)
    fld = solve_connection(prof, prof, 4.0, 40)
    report = flux_residual(fld, params)
    drift = float(np.max(np.abs(fld.v - fld.v[0])))
    ok = report.residual <= 1e-10 and report.residual_infinite <= 1e-10 and drift <= 1e-12
    return CheckResult("trivial_flux", ok, f"flux residual {report.residual:.2e}, t-drift {drift:.2e}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_dual_classification,
    check_elliptic_identity,
    check_p3_constancy,
    check_trivial_energies,
    check_energy_ladder,
    check_trivial_flux,
)


def run_checks() -> list[CheckResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as exc:  # a crashing check is a failed check
            out.append(CheckResult(check.__name__.removeprefix("check_"), False, f"error: {exc}"))
    return out
