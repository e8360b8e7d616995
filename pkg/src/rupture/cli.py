"""Command-line front end.

Exit codes: 0 success, 1 a check or computation failed, 2 invalid usage
(including parameters outside a module's preconditions).

Tabular output goes to ``--output`` when given, otherwise into the directory
named by ``RUPTURE_OUTPUT_DIR`` when that is set, otherwise to standard output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import cylinder, energy, period, profile, verify
from .classify import classify, in_M_explicit
from .params import ProblemParams
from .quadrature import QuadratureError

OUTPUT_DIR_ENV = "RUPTURE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Invalid command-line input; reported with exit code 2."""


# --- option parsing helpers -----------------------------------------------------


def parse_tau_grid(spec: str) -> np.ndarray:
    """A single ``tau`` or ``"min:max:count"``, log-spaced between min and max."""
    parts = spec.split(":")
    try:
        values = [float(x) for x in parts]
    except ValueError:
        raise UsageError(f"bad tau grid {spec!r}; expected min:max:count or a number") from None
    if len(values) == 1:
        if not values[0] >= 1.0:
            raise UsageError(f"tau must be >= 1, got {values[0]}")
        return np.array(values)
    if len(values) != 3 or values[2] != int(values[2]):
        raise UsageError(f"bad tau grid {spec!r}; expected min:max:count")
    lo, hi, count = values[0], values[1], int(values[2])
    if not (1.0 <= lo < hi) or count < 2:
        raise UsageError(f"tau grid needs 1 <= min < max and count >= 2, got {spec!r}")
    return energy.log_tau_grid(lo, hi, count)


def _params(args) -> ProblemParams:
    try:
        return ProblemParams(args.alpha, args.p, args.lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, args, default_name: str) -> None:
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        directory = Path(os.environ[OUTPUT_DIR_ENV])
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / default_name
    if target is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(target).write_text(text if text.endswith("\n") else text + "\n")
        print(f"wrote {target}", file=sys.stderr)


def _tag(params: ProblemParams) -> str:
    return f"a{params.alpha:g}_p{params.p:g}_l{params.lam:g}"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _params_dict(params: ProblemParams) -> dict:
    return {"alpha": params.alpha, "p": params.p, "lambda": params.lam}


# --- commands --------------------------------------------------------------------


def cmd_classify(args) -> int:
    params = _params(args)
    out = classify(params).to_dict()
    out.update(_params_dict(params))
    out["in_M"] = in_M_explicit(params)
    print(_json(out))
    return EXIT_OK


def cmd_regions(args) -> int:
    if not (-2.0 <= args.alpha_min < args.alpha_max) or not (0.0 <= args.p_min < args.p_max):
        raise UsageError("window must lie in (-2, inf) x (0, inf) with min < max")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    # left-open grids so that the excluded edges alpha = -2 and p = 0 never appear
    alphas = args.alpha_min + (args.alpha_max - args.alpha_min) * np.arange(1, args.n + 1) / args.n
    ps = args.p_min + (args.p_max - args.p_min) * np.arange(1, args.n + 1) / args.n
    rows = []
    for p in ps:
        for a in alphas:
            desc = classify((a, p))
            rows.append((float(a), float(p), int(in_M_explicit((a, p))), desc.n0))
    _emit(_csv(["alpha", "p", "in_M", "n0"], rows), args, "regions.csv")
    return EXIT_OK


def cmd_period(args) -> int:
    params = _params(args)
    if args.target_L is not None:
        tau = period.tau_for_period(args.target_L, params)
        rows = [(tau, period.half_period(tau, params))]
    else:
        rows = [(float(t), period.half_period(t, params)) for t in parse_tau_grid(args.tau)]
    if args.format == "json":
        text = _json({**_params_dict(params), "rows": [{"tau": t, "L": L} for t, L in rows]})
    else:
        text = _csv(["tau", "L"], rows)
    _emit(text, args, f"period_{_tag(params)}.{args.format}")
    return EXIT_OK


def cmd_profile(args) -> int:
    params = _params(args)
    if args.eps is not None:
        prof = profile.p3_family(args.eps, args.shift, params, args.n)
    elif args.j == 0:
        prof = profile.trivial_profile(params, args.n)
    else:
        prof = profile.build_profile(args.j, params, args.n)
    if args.format == "json":
        text = _json({
            **_params_dict(params),
            "frequency": prof.frequency,
            "tau": prof.orbit.tau,
            "n": prof.n,
            "residual_sup": prof.residual_sup,
            "theta": prof.thetas.tolist(),
            "w": prof.values.tolist(),
        })
    else:
        text = prof.to_csv()
    _emit(text, args, f"profile_{_tag(params)}_j{prof.frequency}.{args.format}")
    return EXIT_OK


def cmd_energy(args) -> int:
    params = _params(args)
    column = "F1" if params.p == 1.0 else "F"
    if args.tau is None:
        rows = []
        for j, E in energy.component_energies(params):
            tau = energy.component_tau(j, params)
            rows.append({"frequency": j, "tau": tau, "E": E})
        out = {**_params_dict(params), "components": rows}
    else:
        tau = float(args.tau)
        if not tau >= 1.0:
            raise UsageError(f"tau must be >= 1, got {tau}")
        rep = energy.energy_report(tau, params, args.n)
        out = {**_params_dict(params), "column": column, "tau": rep.tau, "F": rep.F, "H": rep.H,
               "E_via_F": rep.E_via_F, "E_direct": rep.E_direct, "L": rep.L}
    if args.format == "csv":
        if "components" in out:
            text = _csv(["frequency", "tau", "E"], [(r["frequency"], r["tau"], r["E"]) for r in out["components"]])
        else:
            text = _csv(["tau", column, "H", "E_via_F", "E_direct", "L"],
                        [(out["tau"], out["F"], out["H"], out["E_via_F"], out["E_direct"], out["L"])])
    else:
        text = _json(out)
    _emit(text, args, f"energy_{_tag(params)}.{args.format}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = _params(args)
    table = energy.monotonicity_sweep(params, parse_tau_grid(args.tau))
    if args.format == "json":
        text = _json({
            **_params_dict(params),
            "column": table.column,
            "direction": table.direction,
            "evidence": table.evidence,
            "violations": table.violations,
            "rows": [{"tau": t, "value": f, "E": e} for t, f, e in table.rows],
        })
    else:
        text = table.to_csv()
    _emit(text, args, f"sweep_{_tag(params)}.{args.format}")
    if table.violations:
        print(f"{len(table.violations)} monotonicity violations at rows {table.violations}", file=sys.stderr)
    return EXIT_OK


def _boundary(spec: str, params: ProblemParams, n: int) -> profile.OrbitProfile:
    """``trivial`` or ``j<frequency>`` with an optional ``@<grid shift>``."""
    spec = spec.strip().lower()
    base, _, shift = spec.partition("@")
    if base == "trivial":
        prof = profile.trivial_profile(params, n)
    elif base.startswith("j") and base[1:].isdigit():
        prof = profile.build_profile(int(base[1:]), params, n)
    else:
        raise UsageError(f"boundary {spec!r}: expected 'trivial' or 'j<k>' with optional '@<shift>'")
    if shift:
        try:
            prof = prof.shifted(int(shift))
        except ValueError:
            raise UsageError(f"bad shift in {spec!r}") from None
    return prof


def cmd_connect(args) -> int:
    params = _params(args)
    if params.p == 3.0:
        raise UsageError("connect does not handle p == 3 (the circle problem has a continuum)")
    if args.nt < 4 or args.nt % 2:
        raise UsageError("--nt must be even and >= 4")
    if args.ntheta < 8 or args.ntheta % 2:
        raise UsageError("--ntheta must be even and >= 8")
    if args.right is None:
        freqs = classify(params).frequencies
        if not freqs:
            raise UsageError("no nontrivial solutions for these parameters; pass --right explicitly")
        args.right = f"j{freqs[0]}"
    left = _boundary(args.left, params, args.ntheta)
    right = _boundary(args.right, params, args.ntheta)
    run = cylinder.run_connection(left, right, args.T, args.nt, check_truncation=not args.no_truncation_check)
    summary = run.summary()
    summary["admissible"] = run.admissible()
    if args.field_csv and run.solution is not None:
        run.solution.to_csv(args.field_csv)
    _emit(_json(summary), args, f"connect_{_tag(params)}_{args.left}_{args.right}.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_checks()
    passed = all(r.passed for r in results)
    if args.json:
        print(_json({"passed": passed, "checks": [r.to_dict() for r in results]}))
    else:
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        print("all checks passed" if passed else "some checks FAILED")
    return EXIT_OK if passed else EXIT_FAILURE


# --- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 as well; keep the message on one line
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_params(p: argparse.ArgumentParser, alpha_required: bool = True) -> None:
    p.add_argument("--alpha", type=float, required=alpha_required, help="exponent alpha > -2")
    p.add_argument("--p", type=float, required=True, help="exponent p > 0")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="lambda > 0 (default 1)")


def _add_output(p: argparse.ArgumentParser, formats: bool = True, default_format: str = "csv") -> None:
    p.add_argument("--output", "-o", help=f"output file (default: ${OUTPUT_DIR_ENV}/<name> or stdout)")
    if formats:
        p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rupture", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="structure of the solution set (JSON)")
    _add_params(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("regions", help="in_M and n0 on an (alpha, p) grid (CSV)")
    p.add_argument("--alpha-min", type=float, default=-2.0)
    p.add_argument("--alpha-max", type=float, default=8.0)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=6.0)
    p.add_argument("--n", type=int, default=400, help="grid points per axis")
    _add_output(p, formats=False)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("period", help="half-period L(tau)")
    _add_params(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tau", help="tau or min:max:count (log-spaced)")
    group.add_argument("--target-L", type=float, help="invert: tau with L(tau) = target")
    _add_output(p)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("profile", help="sampled solution on the circle")
    _add_params(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--j", type=int, help="frequency (0 for the constant solution)")
    group.add_argument("--eps", type=float, help="p == 3 family member with min/max ratio eps")
    p.add_argument("--shift", type=float, default=0.0, help="phase shift a for --eps")
    p.add_argument("--n", type=int, default=profile.DEFAULT_N)
    _add_output(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("energy", help="energy of one orbit or of every component")
    _add_params(p)
    p.add_argument("--tau", type=float, help="amplitude ratio (default: all components)")
    p.add_argument("--n", type=int, default=4096, help="samples per period for E_direct")
    _add_output(p, default_format="json")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("sweep", help="F (or F1) and E on a tau grid")
    _add_params(p)
    p.add_argument("--tau", default="1:1e4:200", help="min:max:count, log-spaced")
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("connect", help="cylinder boundary-value problem between two profiles")
    _add_params(p)
    p.add_argument("--left", default="trivial", help="profile at t = -T: trivial | j<k>[@shift]")
    p.add_argument("--right", default=None,
                   help="profile at t = +T (default: the lowest admissible frequency)")
    p.add_argument("--T", type=float, default=None, help="half-length (default 12/min(beta, 1))")
    p.add_argument("--nt", type=int, default=cylinder.DEFAULT_NT)
    p.add_argument("--ntheta", type=int, default=cylinder.DEFAULT_NTHETA)
    p.add_argument("--no-truncation-check", action="store_true")
    p.add_argument("--field-csv", help="also write the field as t,theta,v")
    _add_output(p, formats=False)
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("verify", help="cross-module identity checks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rupture {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (profile.FrequencyNotAdmissible, period.PeriodRangeError, energy.InadmissibleComponent) as exc:
        print(f"rupture {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rupture {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, profile.IntegratorFailure, cylinder.NoConvergence, ArithmeticError) as exc:
        print(f"rupture {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
