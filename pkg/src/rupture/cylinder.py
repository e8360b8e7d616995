"""Boundary-value problems on a truncated cylinder ``[-T, T] x S^1``.

With ``t = log r`` and ``v = r**(-beta) u`` the equation for ``u`` becomes

    v_tt + 2 beta v_t + v_thth + beta**2 v - lam v**(-p) = 0,

whose ``t``-independent solutions are the profiles on the circle.  A solution
on the whole cylinder that tends to ``w0`` as ``t -> -inf`` and to ``w_inf``
as ``t -> +inf`` satisfies ``E(w0) <= E(w_inf)``: multiplying by ``v_t`` and
integrating over the circle gives, for

    G(t) = E(v(t, .)) - 1/2 int v_t**2 dtheta,

the slice identity ``G'(t) = 2 beta int v_t**2 dtheta >= 0``.  On a truncated
cylinder the identity integrates to ``int int 2 beta v_t**2 = G(T) - G(-T)``,
which reduces to ``E(right) - E(left)`` only when the end slices are at rest.

The solver is Newton's method on the centered second-order discretisation
with Dirichlet rows at ``t = -T, T`` and periodic ``theta``.  The discrete
energy uses forward differences in ``theta``, which makes it the exact
variational counterpart of the three-point ``theta`` Laplacian.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .classify import admissible_connection, classify
from .params import ProblemParams, h
from .profile import OrbitProfile, discrete_residual

NEWTON_TOL = 1e-8
MAX_NEWTON_ITER = 50
MAX_HALVINGS = 30
POLISH_TOL = 1e-12
DEFAULT_NT = 400
DEFAULT_NTHETA = 128
TRUNCATION_TOL = 1e-5
#: slack allowed on the slice monotonicity of G(t)
SLICE_TOL = 1e-6
DIRECT_ATTEMPT_ITER = 8
CONTINUATION_FIRST_STEP = 0.1
CONTINUATION_MIN_STEP = 1e-3
CONTINUATION_ITER = 12


class NoConvergence(RuntimeError):
    """Newton's method stopped without meeting the residual tolerance.

    ``trace`` lists ``(iteration, residual_sup, step_length)`` per iteration.
    """

    def __init__(self, message: str, trace: list[tuple[int, float, float]]):
        super().__init__(message)
        self.trace = trace


# --- change of variables ---------------------------------------------------


def u_to_v(u: Callable, params: ProblemParams) -> Callable:
    """``v(t, theta) = exp(-beta t) u(exp(t), theta)``."""
    beta = params.beta

    def v(t, theta):
        t = np.asarray(t, dtype=float)
        return np.exp(-beta * t) * u(np.exp(t), theta)

    return v


def v_to_u(v: Callable, params: ProblemParams) -> Callable:
    """``u(r, theta) = r**beta v(log r, theta)`` for ``r > 0``."""
    beta = params.beta

    def u(r, theta):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("u is defined for r > 0")
        return r**beta * v(np.log(r), theta)

    return u


# --- fields ------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderField:
    """Grid solution on ``[-T, T] x S^1``; row ``i`` is the slice ``t_i``."""

    T: float
    nt: int
    ntheta: int
    v: np.ndarray
    left_profile: OrbitProfile
    right_profile: OrbitProfile
    residual_sup: float
    iterations: int = 0
    trace: tuple[tuple[int, float, float], ...] = ()

    @property
    def t(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.nt + 1)

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.ntheta) / self.ntheta

    def bounds(self) -> tuple[float, float]:
        """``(C1, C2)``: half the smaller and twice the larger boundary extreme."""
        lo = 0.5 * min(self.left_profile.values.min(), self.right_profile.values.min())
        hi = 2.0 * max(self.left_profile.values.max(), self.right_profile.values.max())
        return lo, hi

    def within_bounds(self) -> bool:
        lo, hi = self.bounds()
        return bool(np.all(self.v >= lo) and np.all(self.v <= hi))

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "theta", "v"])
        for ti, row in zip(self.t, self.v):
            for th, val in zip(self.theta, row):
                writer.writerow([f"{ti:.17g}", f"{th:.17g}", f"{val:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _theta_laplacian(ntheta: int) -> sp.csr_matrix:
    dtheta = 2.0 * math.pi / ntheta
    main = -2.0 * np.ones(ntheta)
    off = np.ones(ntheta - 1)
    lap = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    lap[0, ntheta - 1] = 1.0
    lap[ntheta - 1, 0] = 1.0
    return (lap / dtheta**2).tocsr()


def cylinder_residual(v: np.ndarray, T: float, params: ProblemParams) -> np.ndarray:
    """Discrete equation at the interior nodes, shape ``(nt - 1, ntheta)``."""
    nt = v.shape[0] - 1
    dt = 2.0 * T / nt
    dtheta = 2.0 * math.pi / v.shape[1]
    beta, lam, p = params.beta, params.lam, params.p
    mid = v[1:-1]
    v_tt = (v[2:] - 2.0 * mid + v[:-2]) / dt**2
    v_t = (v[2:] - v[:-2]) / (2.0 * dt)
    v_thth = (np.roll(mid, -1, axis=1) - 2.0 * mid + np.roll(mid, 1, axis=1)) / dtheta**2
    return v_tt + 2.0 * beta * v_t + v_thth + beta**2 * mid - lam * mid ** (-p)


def _cylinder_jacobian(v: np.ndarray, T: float, params: ProblemParams) -> sp.csc_matrix:
    nt, ntheta = v.shape[0] - 1, v.shape[1]
    dt = 2.0 * T / nt
    beta, lam, p = params.beta, params.lam, params.p
    m = nt - 1
    lower = (1.0 / dt**2 - beta / dt) * np.ones(m - 1)
    upper = (1.0 / dt**2 + beta / dt) * np.ones(m - 1)
    t_op = sp.diags([lower, -2.0 / dt**2 * np.ones(m), upper], [-1, 0, 1])
    jac = sp.kron(t_op, sp.identity(ntheta)) + sp.kron(sp.identity(m), _theta_laplacian(ntheta))
    reaction = beta**2 + p * lam * v[1:-1].ravel() ** (-p - 1.0)
    return (jac + sp.diags(reaction)).tocsc()


def _newton(v0: np.ndarray, residual_fn, jacobian_fn, unknowns: slice | None, tol: float,
            max_iter: int) -> tuple[np.ndarray, list[tuple[int, float, float]]]:
    """Damped Newton with positivity-preserving step restriction.

    ``unknowns`` selects the rows of ``v`` being solved for (all rows when None).
    """
    v = v0.copy()
    rows = slice(None) if unknowns is None else unknowns
    r = residual_fn(v)
    res = float(np.max(np.abs(r)))
    trace = [(0, res, 0.0)]
    for it in range(1, max_iter + 1):
        if res <= tol:
            return v, trace
        if not math.isfinite(res):
            raise NoConvergence("residual is not finite", trace)
        delta = splu(jacobian_fn(v)).solve(-r.ravel()).reshape(v[rows].shape)
        current = v[rows]
        vmin = float(current.min())
        step = 1.0
        falling = delta < 0.0
        if np.any(falling):
            # keep every iterate above half the current minimum
            limit = float(np.min((current[falling] - 0.5 * vmin) / -delta[falling]))
            step = min(1.0, limit)
        for _ in range(MAX_HALVINGS):
            trial = v.copy()
            trial[rows] = current + step * delta
            r_trial = residual_fn(trial)
            res_trial = float(np.max(np.abs(r_trial)))
            if math.isfinite(res_trial) and res_trial < res:
                break
            step *= 0.5
        else:
            trace.append((it, res, 0.0))
            raise NoConvergence(f"no decrease after {MAX_HALVINGS} step halvings", trace)
        v, r, res = trial, r_trial, res_trial
        trace.append((it, res, step))
    if res <= tol:
        return v, trace
    raise NoConvergence(f"residual {res:.3e} above {tol:g} after {max_iter} iterations", trace)


def polish_profile(profile: OrbitProfile, tol: float = POLISH_TOL) -> OrbitProfile:
    """Nearest solution of the three-point discrete circle problem.

    The discrete problem keeps the reflection symmetry about ``theta = 0``, so
    Newton is run on even grid functions, which removes the rotation mode from
    the Jacobian.  The result is an exact ``t``-independent solution of the
    cylinder discretisation on the same ``theta`` grid.
    """
    params = profile.params
    w = profile.values
    n = w.size
    if n % 2:
        raise ValueError("polish_profile needs an even grid size")
    half = n // 2
    # even extension: full[k] = reduced[min(k, n - k)]
    idx = np.minimum(np.arange(n), n - np.arange(n))
    ext = sp.csr_matrix((np.ones(n), (np.arange(n), idx)), shape=(n, half + 1))
    restrict = sp.identity(n, format="csr")[: half + 1]
    lap = _theta_laplacian(n)

    def residual_fn(x):
        return discrete_residual(x[0][idx], params)[: half + 1]

    def jacobian_fn(x):
        full = x[0][idx]
        jac = lap + sp.diags(params.beta**2 + params.p * params.lam * full ** (-params.p - 1.0))
        return (restrict @ jac @ ext).tocsc()

    k = np.arange(half + 1)
    x0 = 0.5 * (w[k] + w[(n - k) % n])
    # the discrete Laplacian amplifies rounding by 1/dtheta**2; never ask for less than that
    rounding = 16.0 * np.finfo(float).eps * float(np.max(np.abs(w))) * (n / (2.0 * math.pi)) ** 2
    x, _ = _newton(x0[None, :], residual_fn, jacobian_fn, None, max(tol, rounding), MAX_NEWTON_ITER)
    values = x[0][idx]
    res = float(np.max(np.abs(discrete_residual(values, params))))
    return replace(profile, values=values, residual_sup=res)


def solve_connection(left: OrbitProfile, right: OrbitProfile, T: float | None = None,
                     nt: int = DEFAULT_NT, ntheta: int | None = None,
                     params: ProblemParams | None = None, *, polish: bool = True,
                     tol: float = NEWTON_TOL, max_iter: int = MAX_NEWTON_ITER,
                     continuation: bool = True) -> CylinderField:
    """Solve the cylinder problem with ``left`` at ``t = -T`` and ``right`` at ``t = T``.

    The boundary profiles must share the ``theta`` grid (``ntheta`` points).
    With ``polish`` set they are first replaced by the nearest discrete circle
    solutions, so that equal data admit the exact ``t``-independent field.

    Newton starts from the linear interpolation in ``t`` of the two boundary
    rows.  If that fails within ``DIRECT_ATTEMPT_ITER`` iterations and
    ``continuation`` is set, the right boundary row is moved from ``left`` to
    ``right`` in adaptive steps, each solved by Newton from the previous field.

    Raises
    ------
    NoConvergence
        Carries the iteration trace; expected for pairs without a connection.
    """
    params = left.params if params is None else params
    if left.params != params or right.params != params:
        raise ValueError("boundary profiles were built for different parameters")
    ntheta = left.n if ntheta is None else ntheta
    if left.n != ntheta or right.n != ntheta:
        raise ValueError(f"boundary profiles need {ntheta} points, got {left.n} and {right.n}")
    if nt < 4 or nt % 2:
        raise ValueError(f"nt must be even and >= 4, got {nt}")
    T = default_half_length(params) if T is None else float(T)
    if not T > 0.0:
        raise ValueError(f"T must be > 0, got {T!r}")
    if polish:
        left, right = polish_profile(left), polish_profile(right)

    def residual_fn(x):
        return cylinder_residual(x, T, params)

    def jacobian_fn(x):
        return _cylinder_jacobian(x, T, params)

    interior = slice(1, nt)
    ramp = np.linspace(0.0, 1.0, nt + 1)[:, None]
    v0 = (1.0 - ramp) * left.values[None, :] + ramp * right.values[None, :]
    budget = max_iter if not continuation else min(max_iter, DIRECT_ATTEMPT_ITER)
    try:
        v, trace = _newton(v0, residual_fn, jacobian_fn, interior, tol, budget)
    except NoConvergence as exc:
        if not continuation:
            raise
        v, trace = _continue_boundary(left.values, right.values, ramp, residual_fn, jacobian_fn,
                                      interior, tol, exc.trace)
    return CylinderField(
        T=T, nt=nt, ntheta=ntheta, v=v, left_profile=left, right_profile=right,
        residual_sup=trace[-1][1], iterations=len(trace) - 1, trace=tuple(trace),
    )


def _continue_boundary(left: np.ndarray, right: np.ndarray, ramp: np.ndarray, residual_fn,
                       jacobian_fn, interior: slice, tol: float, trace: list):
    """Move the right boundary row from ``left`` to ``right`` by natural continuation."""
    trace = list(trace)
    v = np.repeat(left[None, :], ramp.shape[0], axis=0)
    s, ds = 0.0, CONTINUATION_FIRST_STEP
    while s < 1.0:
        s_next = min(1.0, s + ds)
        row = left + s_next * (right - left)
        guess = v + ramp * (row - v[-1])[None, :]
        try:
            v_new, sub = _newton(guess, residual_fn, jacobian_fn, interior, tol, CONTINUATION_ITER)
        except NoConvergence as exc:
            trace.extend(exc.trace[1:])
            ds *= 0.5
            if ds < CONTINUATION_MIN_STEP:
                raise NoConvergence(
                    f"continuation stalled at boundary fraction {s:.4g} (step {ds:.2e})", trace
                ) from None
            continue
        trace.extend(sub[1:])
        v, s = v_new, s_next
        ds = min(2.0 * ds, 0.5)
    return v, trace


def default_half_length(params: ProblemParams) -> float:
    return 12.0 / min(params.beta, 1.0)


# --- energy flux -------------------------------------------------------------


def slice_energy(values: np.ndarray, params: ProblemParams) -> float | np.ndarray:
    """Discrete ``E`` of one or more slices (last axis is ``theta``)."""
    values = np.asarray(values, dtype=float)
    dtheta = 2.0 * math.pi / values.shape[-1]
    grad = (np.roll(values, -1, axis=-1) - values) / dtheta
    density = 0.5 * grad**2 - 0.5 * params.beta**2 * values**2 - np.asarray(h(values, params))
    return np.sum(density, axis=-1) * dtheta


def time_derivative(field: CylinderField) -> np.ndarray:
    """``v_t`` at every node: centered inside, second-order one-sided at the ends."""
    v = field.v
    dt = 2.0 * field.T / field.nt
    vt = np.empty_like(v)
    vt[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
    vt[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
    vt[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dt)
    return vt


@dataclass(frozen=True)
class FluxReport:
    """Terms of the integrated slice identity.

    ``residual`` compares the flux with ``G(T) - G(-T)``; ``residual_infinite``
    compares it with ``E(right) - E(left)``, the form that holds when the end
    slices are at rest.
    """

    flux: float
    energy_left: float
    energy_right: float
    kinetic_left: float
    kinetic_right: float
    residual: float
    residual_infinite: float
    t: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)

    @property
    def slice_monotone_defect(self) -> float:
        """Largest decrease of ``G`` between neighbouring slices (0 if none)."""
        return float(max(0.0, -np.min(np.diff(self.G)))) if self.G.size > 1 else 0.0


def flux_residual(field: CylinderField, params: ProblemParams | None = None) -> FluxReport:
    """Integrate ``2 beta v_t**2`` over the cylinder and compare with ``G``."""
    params = field.left_profile.params if params is None else params
    dt = 2.0 * field.T / field.nt
    dtheta = 2.0 * math.pi / field.ntheta
    vt = time_derivative(field)
    kinetic = 0.5 * np.sum(vt**2, axis=1) * dtheta
    G = slice_energy(field.v, params) - kinetic
    density = 2.0 * params.beta * np.sum(vt**2, axis=1) * dtheta
    flux = float(dt * (np.sum(density) - 0.5 * (density[0] + density[-1])))
    e_left = float(slice_energy(field.v[0], params))
    e_right = float(slice_energy(field.v[-1], params))
    return FluxReport(
        flux=flux,
        energy_left=e_left,
        energy_right=e_right,
        kinetic_left=float(kinetic[0]),
        kinetic_right=float(kinetic[-1]),
        residual=abs(flux - (float(G[-1]) - float(G[0]))),
        residual_infinite=abs(flux - (e_right - e_left)),
        t=field.t,
        G=G,
    )


# --- runs --------------------------------------------------------------------


def component_index(profile: OrbitProfile) -> int:
    """0 for the constant solution, ``i`` for the ``i``-th admissible frequency."""
    if profile.frequency == 0:
        return 0
    return classify(profile.params).frequencies.index(profile.frequency) + 1


@dataclass
class ConnectionRun:
    """Outcome of :func:`run_connection`.

    ``verdict`` is ``"converged"`` when Newton met the tolerance and the
    mid-cylinder slice is stable under lengthening the cylinder by half,
    ``"boundary_dominated"`` when Newton converged but that slice moved, and
    ``"no_convergence"`` otherwise.
    """

    verdict: str
    params: ProblemParams
    left_index: int
    right_index: int
    solution: CylinderField | None = None
    flux: FluxReport | None = None
    truncation_change: float = math.nan
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    message: str = ""

    def admissible(self) -> bool | None:
        """``admissible_connection`` for this pair; None at ``p == 3``."""
        if self.params.p == 3.0:
            return None
        n0 = classify(self.params).n0
        return admissible_connection(self.params.p, self.left_index, self.right_index, n0)

    def summary(self) -> dict:
        out = {
            "verdict": self.verdict,
            "alpha": self.params.alpha,
            "p": self.params.p,
            "lambda": self.params.lam,
            "left_component": self.left_index,
            "right_component": self.right_index,
            "iterations": len(self.trace) - 1 if self.trace else 0,
            "residual_sup": self.trace[-1][1] if self.trace else None,
            "truncation_change": None if math.isnan(self.truncation_change) else self.truncation_change,
            "message": self.message,
        }
        if self.solution is not None:
            out.update(T=self.solution.T, nt=self.solution.nt, ntheta=self.solution.ntheta)
        if self.flux is not None:
            out.update(
                flux=self.flux.flux,
                E_left=self.flux.energy_left,
                E_right=self.flux.energy_right,
                kinetic_left=self.flux.kinetic_left,
                kinetic_right=self.flux.kinetic_right,
                flux_residual=self.flux.residual,
                flux_residual_infinite=self.flux.residual_infinite,
                slice_monotone_defect=self.flux.slice_monotone_defect,
            )
        return out

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.summary(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def run_connection(left: OrbitProfile, right: OrbitProfile, T: float | None = None,
                   nt: int = DEFAULT_NT, *, check_truncation: bool = True) -> ConnectionRun:
    """Solve, compute the flux terms and classify the outcome.

    The truncation check re-solves on ``[-1.5 T, 1.5 T]`` at the same step
    and compares the slices at ``t = 0``.
    """
    params = left.params
    T = default_half_length(params) if T is None else float(T)
    run = ConnectionRun(verdict="no_convergence", params=params,
                        left_index=component_index(left), right_index=component_index(right))
    try:
        fld = solve_connection(left, right, T, nt)
    except NoConvergence as exc:
        run.trace, run.message = exc.trace, str(exc)
        return run
    run.solution, run.trace = fld, list(fld.trace)
    run.flux = flux_residual(fld, params)
    run.verdict = "converged"
    if check_truncation:
        nt_long = 3 * nt // 2
        if nt_long % 2:
            nt_long += 1
        try:
            longer = solve_connection(left, right, 1.5 * T, nt_long)
        except NoConvergence as exc:
            run.verdict, run.message = "boundary_dominated", f"1.5T re-solve failed: {exc}"
            return run
        mid, mid_long = fld.v[nt // 2], longer.v[nt_long // 2]
        run.truncation_change = float(np.max(np.abs(mid - mid_long)))
        if run.truncation_change > TRUNCATION_TOL:
            run.verdict = "boundary_dominated"
            run.message = f"mid-slice moved by {run.truncation_change:.3e} at 1.5T"
    return run
