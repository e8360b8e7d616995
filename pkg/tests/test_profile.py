import math

import numpy as np
import pytest

from rupture.params import ProblemParams, g, w_min_of_tau
from rupture.period import half_period
from rupture.profile import (
    FrequencyNotAdmissible,
    build_profile,
    discrete_residual,
    measured_half_period,
    p3_family,
    periodic_d1,
    periodic_d2,
    residual,
    residual_on_window,
    sample_orbit,
    trivial_profile,
)

# (alpha, p, j) fixtures resolved to 1e-6 by the default n = 2048 grid
RESOLVED = [(1.2, 2.0, 2), (2.7, 2.0, 3), (20.0, 2.0, 13), (8.0, 5.0, 4), (1.5, 0.5, 3), (2.0, 1.0, 3)]


@pytest.fixture(scope="module", params=RESOLVED, ids=lambda c: f"a{c[0]}-p{c[1]}-j{c[2]}")
def profile(request):
    alpha, p, j = request.param
    return build_profile(j, ProblemParams(alpha, p))


def test_stencils_exact_on_trig():
    n = 64
    x = 2 * math.pi * np.arange(n) / n
    for order in (2, 4, 6, 8):
        tol = {2: 5e-2, 4: 1e-3, 6: 3e-5, 8: 1e-6}[order]
        assert np.max(np.abs(periodic_d1(np.sin(3 * x), x[1], order) - 3 * np.cos(3 * x))) < tol
        assert np.max(np.abs(periodic_d2(np.sin(3 * x), x[1], order) + 9 * np.sin(3 * x))) < 3 * tol


def test_residual(profile):
    assert profile.residual_sup <= 1e-6
    assert residual(profile) == profile.residual_sup


def test_extrema_ratio(profile):
    w = profile.values
    orb = profile.orbit
    assert w.min() == pytest.approx(orb.w1, rel=1e-12)
    # the maximum sits on the grid because n is a multiple of 2 j
    assert w.max() / w.min() == pytest.approx(orb.tau, rel=1e-12)


def test_level_set(profile):
    prm = profile.params
    w = profile.values
    w_theta = periodic_d1(w, 2 * math.pi / w.size, 8)
    level = w_theta**2 + g(w, prm)
    assert np.max(np.abs(level - profile.orbit.phase_constant)) <= 1e-8 * abs(profile.orbit.phase_constant) + 1e-9


def test_periodicity(profile):
    j = profile.frequency
    n = 2 * j * 128
    prof = build_profile(j, profile.params, n=n)
    np.testing.assert_allclose(prof.shifted(n // j).values, prof.values, rtol=1e-12)
    np.testing.assert_allclose(prof.shifted(n // j + 7).values, prof.shifted(7).values, rtol=1e-12)


def test_measured_half_period(profile):
    assert measured_half_period(profile) == pytest.approx(math.pi / profile.frequency, abs=1e-7)


def test_positive(profile):
    assert np.all(profile.values > 0)


def test_shift_covariance():
    prm = ProblemParams(1.2, 2.0)
    base = build_profile(2, prm, n=1024)
    for k in (1, 17, 300):
        r = discrete_residual(base.shifted(k).values, prm, 8)
        assert np.max(np.abs(r)) == pytest.approx(np.max(np.abs(discrete_residual(base.values, prm, 8))), rel=1e-12)


def test_trivial():
    prm = ProblemParams(0.3, 2.0, 2.0)
    prof = trivial_profile(prm)
    assert np.all(prof.values == prm.m0)
    assert prof.residual_sup <= 1e-14
    assert prof.frequency == 0


def test_inadmissible_frequencies():
    with pytest.raises(FrequencyNotAdmissible):
        build_profile(1, ProblemParams(0.0, 2.0))
    with pytest.raises(FrequencyNotAdmissible):
        build_profile(3, ProblemParams(1.2, 2.0))
    with pytest.raises(FrequencyNotAdmissible):
        build_profile(1, ProblemParams(2.0, 3.0))


@pytest.mark.parametrize("alpha,p,j", [(20.0, 2.0, 14), (1.5, 1.0, 3)])
def test_large_ratio_profiles_converge_under_refinement(alpha, p, j):
    # these orbits are too sharp for 2048 points; the residual must fall fast with n
    prm = ProblemParams(alpha, p)
    coarse = build_profile(j, prm, n=2048).residual_sup
    fine = build_profile(j, prm, n=8192).residual_sup
    assert fine < 1e-4
    assert fine < coarse / 100


@pytest.mark.parametrize("alpha", [0.0, 2.0, 6.0])
@pytest.mark.parametrize("eps", [0.2, 0.7, 1.0])
def test_p3_family(alpha, eps):
    prm = ProblemParams(alpha, 3.0, 1.3)
    for a in (0.0, 0.4):
        prof = p3_family(eps, a, prm)
        assert prof.residual_sup <= 1e-6
    assert p3_family(eps, 0.0, prm).values[0] == pytest.approx(prm.m0 * math.sqrt(eps), rel=1e-14)


def test_p3_family_shift():
    prm = ProblemParams(2.0, 3.0)
    n = 2048
    base = p3_family(0.3, 0.0, prm, n)
    moved = p3_family(0.3, 5 * 2 * math.pi / n, prm, n)
    np.testing.assert_allclose(moved.values, base.shifted(5).values, rtol=1e-13)


def test_p3_family_rejects():
    with pytest.raises(ValueError):
        p3_family(0.5, 0.0, ProblemParams(1.0, 3.0))
    with pytest.raises(ValueError):
        p3_family(0.5, 0.0, ProblemParams(2.0, 2.0))
    with pytest.raises(ValueError):
        p3_family(1.5, 0.0, ProblemParams(2.0, 3.0))


def test_explicit_half_line_solution():
    # alpha = 0, p = 1/2: w(theta) = (9/4 sin^2 theta)^(2/3) solves the circle ODE where positive
    prm = ProblemParams(0.0, 0.5, 1.0)

    def w(theta):
        return (9.0 / 4.0 * np.sin(theta) ** 2) ** (2.0 / 3.0)

    assert residual_on_window(w, prm, 0.2, math.pi - 0.2) <= 1e-6


def test_sample_orbit_matches_half_period():
    prm = ProblemParams(0.0, 2.0)
    tau = 4.0
    theta, w = sample_orbit(tau, prm, 512)
    assert theta[-1] < 2 * half_period(tau, prm)
    assert w[0] == pytest.approx(w_min_of_tau(tau, prm), rel=1e-14)
    assert w.max() == pytest.approx(tau * w[0], rel=1e-12)


def test_csv(tmp_path):
    prof = build_profile(2, ProblemParams(1.2, 2.0), n=64)
    text = prof.to_csv(tmp_path / "w.csv")
    lines = text.splitlines()
    assert lines[0] == "theta,w" and len(lines) == 65
    assert (tmp_path / "w.csv").read_text() == text
    th, val = map(float, lines[10].split(","))
    assert th == prof.thetas[9] and val == prof.values[9]


def test_p3_family_examples():
    prm = ProblemParams(2.0, 3.0, 1.0)
    np.testing.assert_allclose(p3_family(1.0, 0.0, prm, 64).values, trivial_profile(prm, 64).values, rtol=1e-15)
    prm = ProblemParams(0.0, 3.0, 1.0)
    prof = p3_family(0.25, 0.0, prm)
    th = prof.thetas
    expected = math.sqrt(2) * np.sqrt(0.25 * np.cos(th / 2) ** 2 + 4 * np.sin(th / 2) ** 2)
    np.testing.assert_allclose(prof.values, expected, rtol=1e-14)
    assert prof.residual_sup <= 1e-8
    assert prof.values.min() / prof.values.max() == pytest.approx(0.25, rel=1e-12)
    for eps in (0.1, 0.5, 1.0):
        assert p3_family(eps, 0.3, ProblemParams(2.0, 3.0), 4096).residual_sup <= 1e-8


def test_named_profiles():
    prm = ProblemParams(1.2, 2.0, 1.0)
    assert build_profile(2, prm).residual_sup <= 1e-7
    assert trivial_profile(ProblemParams(0.0, 2.0)).values[0] == pytest.approx((9 / 4) ** (1 / 3), rel=1e-15)
    assert trivial_profile(ProblemParams(2.0, 3.0)).values[0] == pytest.approx(1.0, rel=1e-15)
