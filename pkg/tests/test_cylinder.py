import json
import math

import numpy as np
import pytest
import scipy.sparse as sp

from rupture.cylinder import (
    NoConvergence,
    _cylinder_jacobian,
    component_index,
    cylinder_residual,
    default_half_length,
    flux_residual,
    polish_profile,
    run_connection,
    slice_energy,
    solve_connection,
    u_to_v,
    v_to_u,
)
from rupture.params import ProblemParams
from rupture.profile import build_profile, discrete_residual, trivial_profile

PRM = ProblemParams(1.2, 2.0)
NTHETA = 64


@pytest.fixture(scope="module")
def trivial():
    return trivial_profile(PRM, NTHETA)


@pytest.fixture(scope="module")
def w2():
    return build_profile(2, PRM, NTHETA)


def test_change_of_variables_round_trip():
    def u(r, theta):
        return r**2 * (1.5 + np.cos(theta)) + r

    v = u_to_v(u, PRM)
    back = v_to_u(v, PRM)
    r = np.array([0.1, 1.0, 3.0])
    th = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(back(r, th), u(r, th), rtol=1e-14)
    with pytest.raises(ValueError):
        back(np.array([0.0]), np.array([0.0]))


def test_radial_solution_maps_to_constant():
    # u = m0 r**beta is the homogeneous radial solution; v must be the constant m0
    u = v_to_u(lambda t, th: PRM.m0 + 0 * t, PRM)
    v = u_to_v(u, PRM)
    t = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(v(t, 0.3), PRM.m0, rtol=1e-14)
    np.testing.assert_allclose(u(np.e, 0.0), PRM.m0 * math.e**PRM.beta, rtol=1e-14)


def test_residual_vanishes_on_constant_field():
    v = np.full((11, NTHETA), PRM.m0)
    assert np.max(np.abs(cylinder_residual(v, 1.0, PRM))) < 1e-12


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    nt, nth, T = 6, 8, 1.0
    v = PRM.m0 * (1 + 0.2 * rng.random((nt + 1, nth)))
    jac = _cylinder_jacobian(v, T, PRM)
    assert sp.issparse(jac)
    jac = jac.toarray()
    base = cylinder_residual(v, T, PRM).ravel()
    eps = 1e-7
    cols = [0, 9, 20, 33, 39]
    for k in cols:
        # unknowns are the interior rows; boundary rows stay fixed
        pert = v.copy().ravel()
        pert[nth + k] += eps
        col = (cylinder_residual(pert.reshape(v.shape), T, PRM).ravel() - base) / eps
        np.testing.assert_allclose(jac[:, k], col, atol=1e-5)


def test_polish_profile(w2):
    polished = polish_profile(w2)
    assert polished.residual_sup < 1e-12
    assert np.max(np.abs(discrete_residual(polished.values, PRM))) == polished.residual_sup
    np.testing.assert_allclose(polished.values[1:], polished.values[:0:-1], rtol=1e-14)
    # the discrete and continuous solutions differ at second order in the grid step
    gaps = []
    for n in (64, 128, 256):
        prof = build_profile(2, PRM, n)
        gaps.append(np.max(np.abs(polish_profile(prof).values - prof.values)))
    assert gaps[0] / gaps[1] > 3 and gaps[1] / gaps[2] > 3


@pytest.mark.parametrize("name", ["trivial", "w2"])
def test_equal_boundaries(name, request):
    prof = request.getfixturevalue(name)
    run = run_connection(prof, prof, nt=80)
    assert run.verdict == "converged"
    fld = run.solution
    assert np.max(np.abs(fld.v - fld.v[0][None, :])) < 1e-12
    assert run.flux.residual <= 1e-8 and run.flux.residual_infinite <= 1e-8
    assert run.flux.slice_monotone_defect <= 1e-6
    assert fld.within_bounds()


def test_default_half_length():
    assert default_half_length(PRM) == pytest.approx(12 / min(PRM.beta, 1.0))


def test_short_cylinder_connection(trivial, w2):
    fld = solve_connection(trivial, w2, T=0.5, nt=100)
    rep = flux_residual(fld)
    assert fld.residual_sup < 1e-8
    assert rep.slice_monotone_defect <= 1e-6
    assert rep.flux > 0
    assert rep.energy_left < rep.energy_right
    assert fld.within_bounds()
    assert np.all(fld.v[0] == polish_profile(trivial).values)


def test_flux_identity_converges_under_grid_doubling(trivial, w2):
    residuals = [flux_residual(solve_connection(trivial, w2, T=0.5, nt=nt)).residual for nt in (50, 100, 200)]
    ratios = [a / b for a, b in zip(residuals, residuals[1:])]
    assert all(r >= 3 for r in ratios)


def test_short_cylinder_is_boundary_dominated(trivial, w2):
    run = run_connection(trivial, w2, T=0.5, nt=100)
    assert run.verdict == "boundary_dominated"
    assert run.truncation_change > 1e-5
    assert run.admissible() is True


def test_no_convergence_carries_trace(trivial, w2):
    with pytest.raises(NoConvergence) as info:
        solve_connection(trivial, w2, T=0.5, nt=100, max_iter=1, continuation=False)
    assert len(info.value.trace) >= 1
    it, res, step = info.value.trace[0]
    assert it == 0 and res > 0


def test_input_validation(trivial, w2):
    with pytest.raises(ValueError):
        solve_connection(trivial, build_profile(2, PRM, 32), T=1.0)
    with pytest.raises(ValueError):
        solve_connection(trivial, w2, T=1.0, nt=7)
    with pytest.raises(ValueError):
        solve_connection(trivial, trivial_profile(ProblemParams(0.0, 2.0), NTHETA), T=1.0)


def test_component_index(trivial, w2):
    assert component_index(trivial) == 0
    assert component_index(w2) == 1


def test_slice_energy_of_constant():
    vals = np.full(NTHETA, PRM.m0)
    assert slice_energy(vals, PRM) == pytest.approx(
        2 * math.pi * (-0.5 * PRM.beta**2 * PRM.m0**2 - PRM.lam / PRM.m0), rel=1e-14)


def test_serialisation(tmp_path, trivial):
    run = run_connection(trivial, trivial, T=1.0, nt=8)
    data = json.loads(run.to_json(tmp_path / "run.json"))
    assert data["verdict"] == "converged" and data["left_component"] == 0
    assert json.loads((tmp_path / "run.json").read_text()) == data
    text = run.solution.to_csv(tmp_path / "field.csv")
    lines = text.splitlines()
    assert lines[0] == "t,theta,v" and len(lines) == 1 + 9 * NTHETA
    assert float(lines[1].split(",")[0]) == -1.0


def test_p3_runs_have_no_admissibility_verdict():
    prm = ProblemParams(2.0, 3.0)
    prof = trivial_profile(prm, 32)
    run = run_connection(prof, prof, T=1.0, nt=8)
    assert run.verdict == "converged" and run.admissible() is None


@pytest.mark.slow
def test_default_length_trivial_to_w2_does_not_converge(trivial, w2):
    # low modes near the constant solution grow like exp(2 beta T) across the cylinder
    run = run_connection(trivial, w2)
    assert run.verdict == "no_convergence"
    assert run.trace
