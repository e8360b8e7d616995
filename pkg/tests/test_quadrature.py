import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rupture.quadrature import (
    QuadratureError,
    agm,
    agm_iterations,
    cubic_root_integral,
    cubic_root_integral_agm,
    elliptic_K,
    integrate_singular,
)


def test_arcsine_integral():
    res = integrate_singular(lambda x, da, db: 1 / np.sqrt(db * (1 + x)), 0.0, 1.0, with_distances=True)
    assert res.value == pytest.approx(math.pi / 2, rel=1e-13)
    assert res.error_estimate >= 0 and res.evaluations > 0


def test_arcsine_integral_plain_form_reports_its_error():
    # without endpoint distances 1 - x**2 loses digits near x = 1, and the
    # tail term of the estimate makes that visible instead of hiding it
    with pytest.raises(QuadratureError) as info:
        integrate_singular(lambda x: 1 / np.sqrt(1 - x * x), 0.0, 1.0, 1e-10)
    assert info.value.value == pytest.approx(math.pi / 2, rel=1e-7)
    res = integrate_singular(lambda x: 1 / np.sqrt(1 - x * x), 0.0, 1.0, 1e-6)
    assert abs(res.value - math.pi / 2) <= max(1e-6 * math.pi / 2, res.error_estimate)


def test_beta_function_integral():
    res = integrate_singular(lambda x, da, db: 1 / np.sqrt(da * db), 0.0, 1.0, with_distances=True)
    assert res.value == pytest.approx(math.pi, rel=1e-13)


def test_smooth_integrand():
    res = integrate_singular(np.exp, 0.0, 2.0, 1e-12)
    assert res.value == pytest.approx(math.e**2 - 1, rel=1e-13)


def test_bad_interval():
    with pytest.raises(ValueError):
        integrate_singular(np.exp, 1.0, 1.0)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.lists(st.floats(-3, 3), min_size=1, max_size=4))
def test_linearity(c1, c2):
    def poly_over_sqrt(c):
        return lambda x, da, db: np.polyval(c, x) / np.sqrt(da * db)

    f, g = poly_over_sqrt(c1), poly_over_sqrt(c2)
    total = integrate_singular(lambda x, da, db: f(x, da, db) + g(x, da, db), 0, 1, 1e-11,
                               atol=1e-12, with_distances=True)
    rf = integrate_singular(f, 0, 1, 1e-11, atol=1e-12, with_distances=True)
    rg = integrate_singular(g, 0, 1, 1e-11, atol=1e-12, with_distances=True)
    slack = total.error_estimate + rf.error_estimate + rg.error_estimate + 1e-12 * (abs(rf.value) + abs(rg.value) + 1)
    assert abs(total.value - rf.value - rg.value) <= slack


def test_agm_examples():
    assert agm(1.0, 1.0) == 1.0
    assert agm(7.0, 14.0) == pytest.approx(7 * agm(1.0, 2.0), rel=1e-15)
    assert agm(2.0, 1.0) == agm(1.0, 2.0)
    with pytest.raises(ValueError):
        agm(0.0, 1.0)
    with pytest.raises(ValueError):
        agm(-1.0, 1.0)


@given(st.floats(1e-8, 1e8), st.floats(1e-8, 1e8))
def test_agm_between_and_fast(x, y):
    m = agm(x, y)
    assert min(x, y) * (1 - 1e-15) <= m <= max(x, y) * (1 + 1e-15)
    assert agm_iterations(x, y) <= 10


def test_elliptic_K():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-16)
    for k2 in (0.1, 0.5, 0.9):
        direct = integrate_singular(lambda t: 1 / np.sqrt(1 - k2 * np.sin(t) ** 2), 0, math.pi / 2, 1e-14).value
        assert elliptic_K(k2) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        elliptic_K(1.0)


def test_K_logarithmic_asymptote():
    k = 1e-6
    assert (math.pi / 2) / agm(k, 1.0) / math.log(4 / k) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("tau", [1.5, 2.0, 4.0, 10.0, 100.0])
def test_cubic_root_identity(tau):
    quad = integrate_singular(lambda y, da, db: 1 / np.sqrt(y * da * db), 1.0, tau, 1e-12, with_distances=True)
    assert quad.value == pytest.approx(cubic_root_integral_agm(tau), rel=1e-9)
    assert cubic_root_integral(tau).value == pytest.approx(quad.value, rel=1e-14)
    if tau == 4.0:
        assert cubic_root_integral_agm(tau) == pytest.approx(elliptic_K(0.75), rel=1e-15)
