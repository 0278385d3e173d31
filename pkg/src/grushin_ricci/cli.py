"""Command-line entry point: ``grushin-ricci <subcommand> [flags]``.

Exit codes: 0 success (and every requested certificate verified), 1 a
certificate refuted or inconclusive, 2 solver non-convergence, 64 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Callable, Sequence

from . import certify as cert_mod
from . import curvature, gh_lab, kernel
from .geodesics import (
    GrushinHalfplane,
    LimitHemisphere,
    NonConvergenceError,
    SphereDWP,
    boundary_distance,
    distance,
    geodesic_ivp,
    oracle_distance,
)
from .params import DomainError, WarpParams
from .report import emit_report

EXIT_OK, EXIT_REFUTED, EXIT_NONCONVERGENCE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- flag validators ---------------------------------------------------------

def _checked(kind: Callable, test: Callable, what: str):
    def parse(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}") from None
        if not test(value):
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}")
        return value
    return parse


def _finite(x):
    return math.isfinite(x)


LAMBDA = _checked(float, lambda x: _finite(x) and x >= 1.0, "a real lambda >= 1")
POS_REAL = _checked(float, lambda x: _finite(x) and x > 0.0, "a real > 0")
REAL = _checked(float, _finite, "a finite real")
M_INT = _checked(int, lambda x: x >= 1, "an integer m >= 1")
N_INT = _checked(int, lambda x: x >= 2, "an integer n >= 2")
DEPTH = _checked(int, lambda x: 1 <= x <= 64, "an integer depth in [1, 64]")
WORKERS = _checked(int, lambda x: x >= 1, "an integer >= 1")
SEED = _checked(int, lambda x: x >= 0, "an integer seed >= 0")
RESOLUTION = _checked(int, lambda x: x >= 64, "an integer resolution >= 64")
GRID = _checked(int, lambda x: x >= 2, "an integer >= 2")


def _real_list(test: Callable, what: str):
    def parse(text: str):
        try:
            vals = [float(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated {what}, got {text!r}") from None
        if not vals or not all(_finite(v) and test(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected comma-separated {what}, got {text!r}")
        return vals
    return parse


LAMBDA_LIST = _real_list(lambda x: x >= 1.0, "lambdas >= 1")
POS_LIST = _real_list(lambda x: x > 0.0, "reals > 0")
POINT = _real_list(lambda x: True, "coordinates")


def _common(p: argparse.ArgumentParser, fmt: bool = True):
    if fmt:
        p.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")
    p.add_argument("--output", metavar="PATH", default=None, help="write the report here instead of stdout")
    p.add_argument("--verbose", action="store_true", help="progress messages on stderr")


def _workers(p: argparse.ArgumentParser):
    p.add_argument("--workers", type=WORKERS, default=os.cpu_count() or 1,
                   help="worker processes, >= 1 (default: available CPUs)")


def _spec_flags(p: argparse.ArgumentParser):
    p.add_argument("--spec", choices=("sphere", "hemisphere", "grushin"), required=True,
                   help="sphere: (r, alpha, beta); hemisphere: (phi, beta); grushin: (x, y)")
    p.add_argument("--lambda", dest="lam", type=LAMBDA, default=1.0, help="lambda >= 1 (sphere; default 1)")
    p.add_argument("--m", type=M_INT, default=8, help="m >= 1 (default 8)")
    p.add_argument("--n", type=N_INT, default=2, help="n >= 2 (default 2)")
    p.add_argument("--alpha", type=POS_REAL, default=1.0, help="Grushin exponent > 0 (default 1)")


def _make_spec(args):
    if args.spec == "sphere":
        return SphereDWP(WarpParams(args.lam, args.m, args.n))
    if args.spec == "hemisphere":
        return LimitHemisphere(args.n)
    return GrushinHalfplane(args.alpha)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grushin-ricci",
                     description="Curvature certificates, distances and collapse diagnostics "
                                 "for doubly warped sphere metrics.",
                     epilog="exit codes: 0 success, 1 refuted or inconclusive, "
                            "2 non-convergence, 64 usage error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate a warping function or curvature ratio")
    p.add_argument("--quantity", choices=sorted(kernel.QUANTITIES), required=True,
                   help="one of: " + ", ".join(sorted(kernel.QUANTITIES)))
    p.add_argument("--r", type=REAL, required=True, help="r in [0, pi/2]")
    p.add_argument("--lambda", dest="lam", type=LAMBDA, required=True, help="lambda >= 1")
    _common(p)

    p = sub.add_parser("curvature", help="Ricci components along H, U, V")
    p.add_argument("--lambda", dest="lam", type=LAMBDA, required=True, help="lambda >= 1")
    p.add_argument("--m", type=M_INT, required=True, help="m >= 1")
    p.add_argument("--n", type=N_INT, required=True, help="n >= 2")
    p.add_argument("--r", type=REAL, default=None, help="r in [0, pi/2]; omit to scan the grid")
    p.add_argument("--grid", type=GRID, default=1000, help="scan size when --r is omitted (default 1000)")
    _common(p)

    p = sub.add_parser("certify", help="certify one registered claim")
    p.add_argument("--claim", choices=list(cert_mod.REGISTRY), required=True,
                   help="registered claim id: " + ", ".join(cert_mod.REGISTRY))
    p.add_argument("--lambda", dest="lam", type=LAMBDA, required=True, help="lambda >= 1")
    p.add_argument("--m", type=M_INT, required=True, help="m >= 1")
    p.add_argument("--n", type=N_INT, required=True, help="n >= 2")
    p.add_argument("--depth", type=DEPTH, default=48, help="maximum bisection depth in [1, 64] (default 48)")
    p.add_argument("--ignore-guard", action="store_true", help="run even when the claim's m/n guard fails")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (output no longer bit-stable)")
    _common(p, fmt=False)

    p = sub.add_parser("registry", help="status of every registered claim over a lambda list")
    p.add_argument("--lambdas", type=LAMBDA_LIST, default=[1.0, 5.0, 100.0], help="comma list (default 1,5,100)")
    p.add_argument("--m", type=M_INT, required=True, help="m >= 1")
    p.add_argument("--n", type=N_INT, required=True, help="n >= 2")
    p.add_argument("--claims", default=None, help="comma list of claim ids (default: all)")
    p.add_argument("--depth", type=DEPTH, default=48, help="maximum bisection depth in [1, 64] (default 48)")
    p.add_argument("--timing", action="store_true", help="include wall-clock time")
    _workers(p)
    _common(p)

    p = sub.add_parser("dist", help="distance between two reduced points")
    _spec_flags(p)
    p.add_argument("--p", type=POINT, required=True, help="first point, comma separated (use --p=-1,2 for negatives)")
    p.add_argument("--q", type=POINT, required=True, help="second point, comma separated")
    p.add_argument("--tol", type=POS_REAL, default=1e-8, help="solver tolerance > 0 (default 1e-8)")
    p.add_argument("--oracle-resolution", type=RESOLUTION, default=None,
                   help="also run the grid-graph oracle at this resolution (>= 64)")
    _common(p)

    p = sub.add_parser("geodesic", help="integrate a geodesic from Clairaut constants")
    _spec_flags(p)
    p.add_argument("--start", type=POINT, required=True, help="start point, comma separated")
    p.add_argument("--c-alpha", type=REAL, default=0.0, help="Clairaut constant of the first fiber (default 0)")
    p.add_argument("--c-beta", type=REAL, default=0.0, help="Clairaut constant of the second fiber (default 0)")
    p.add_argument("--sign", type=int, choices=(-1, 1), default=1, help="initial direction of the base coordinate")
    p.add_argument("--max-len", type=POS_REAL, default=1.0, help="arc length to integrate (default 1)")
    p.add_argument("--tol", type=POS_REAL, default=1e-8, help="integrator tolerance > 0 (default 1e-8)")
    _common(p)

    p = sub.add_parser("gh-sweep", help="distortion of the collapse correspondence over lambdas")
    p.add_argument("--n", type=N_INT, default=2, help="n >= 2 (default 2)")
    p.add_argument("--m", type=M_INT, default=8, help="m >= 1 (default 8)")
    p.add_argument("--lambdas", type=LAMBDA_LIST, default=[1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
                   help="nondecreasing comma list (default 1,2,5,10,20,50)")
    p.add_argument("--eps", type=POS_REAL, default=0.15, help="net radius > 0 (default 0.15)")
    p.add_argument("--seed", type=SEED, default=42, help="net seed (default 42)")
    _workers(p)
    _common(p)

    p = sub.add_parser("probe-dim", help="covering-number dimension of a region")
    _spec_flags(p)
    p.add_argument("--region", choices=("equator-band", "interior-ball"), required=True,
                   help="equator-band: the completion boundary; interior-ball: a ball in the smooth part")
    p.add_argument("--eps-list", type=POS_LIST, default=[0.2, 0.1, 0.05, 0.025],
                   help="strictly decreasing comma list, >= 3 values (default 0.2,0.1,0.05,0.025)")
    p.add_argument("--tol", type=POS_REAL, default=1e-8, help="solver tolerance > 0 (default 1e-8)")
    _workers(p)
    _common(p)

    p = sub.add_parser("tangent-cone", help="rescaled hemisphere vs Grushin distances at the equator")
    p.add_argument("--n", type=N_INT, default=2, help="n >= 2 (default 2)")
    p.add_argument("--scales", type=POS_LIST, default=[0.1, 0.05, 0.02],
                   help="strictly decreasing comma list, each <= 0.1 (default 0.1,0.05,0.02)")
    p.add_argument("--variant", choices=("anisotropic", "isotropic"), default="anisotropic",
                   help="which rescaling the CSV reports (JSON carries both)")
    p.add_argument("--tol", type=POS_REAL, default=1e-10, help="solver tolerance > 0 (default 1e-10)")
    _common(p)
    return parser


# -- handlers ----------------------------------------------------------------

def _log(args, msg: str):
    if getattr(args, "verbose", False):
        print(msg, file=sys.stderr)


def _cmd_eval(args) -> int:
    value = kernel.QUANTITIES[args.quantity](args.r, args.lam)
    payload = {"quantity": args.quantity, "r": args.r, "lambda": args.lam, "value": value}
    if args.format == "json" and args.output is None:
        from .report import format_float
        print(format_float(value))
        return EXIT_OK
    emit_report(payload, args.format, args.output, columns=list(payload))
    return EXIT_OK


def _cmd_curvature(args) -> int:
    params = WarpParams(args.lam, args.m, args.n)
    if args.r is not None:
        rc = curvature.ric(args.r, params)
        payload = {"r": args.r, "lambda": args.lam, "m": args.m, "n": args.n,
                   "hh": rc.hh, "uu": rc.uu, "vv": rc.vv, "term_I": curvature.term_I(args.r, params).value}
    else:
        value, comp, r = curvature.ric_min_scan(params, args.grid)
        payload = {"lambda": args.lam, "m": args.m, "n": args.n, "grid": args.grid,
                   "min": value, "component": comp, "r": r}
    emit_report(payload, args.format, args.output, columns=list(payload))
    return EXIT_OK


def _cmd_certify(args) -> int:
    c = cert_mod.certify_claim(args.claim, WarpParams(args.lam, args.m, args.n), max_depth=args.depth,
                               check_guard=not args.ignore_guard)
    emit_report(c.to_dict(timing=args.timing), "json", args.output)
    return EXIT_OK if c.status == "verified" else EXIT_REFUTED


def _cmd_registry(args) -> int:
    claims = None
    if args.claims:
        claims = [c.strip() for c in args.claims.split(",") if c.strip()]
        unknown = [c for c in claims if c not in cert_mod.REGISTRY]
        if unknown:
            raise UsageError(f"--claims: unknown claim(s) {', '.join(unknown)}; known: {', '.join(cert_mod.REGISTRY)}")
    certs = cert_mod.registry_report(args.n, args.m, args.lambdas, claims, args.depth, args.workers)
    rows = [c.to_dict(timing=args.timing) for c in certs]
    if args.format == "csv":
        flat = [{**{k: v for k, v in r.items() if k != "witness"},
                 "witness_r": (r["witness"] or {}).get("r"),
                 "witness_value": (r["witness"] or {}).get("value")} for r in rows]
        emit_report(flat, "csv", args.output, columns=list(flat[0]))
    else:
        emit_report(rows, "json", args.output)
    return EXIT_OK if all(c.status == "verified" for c in certs) else EXIT_REFUTED


def _on_boundary(spec, pt) -> bool:
    return not isinstance(spec, SphereDWP) and pt[0] == 0.0


def _cmd_dist(args) -> int:
    spec = _make_spec(args)
    p, q = tuple(args.p), tuple(args.q)
    want = 3 if isinstance(spec, SphereDWP) else 2
    for flag, pt in (("--p", p), ("--q", q)):
        if len(pt) != want:
            raise UsageError(f"{flag}: expected {want} coordinates for --spec {args.spec}, got {len(pt)}")
    payload = {"spec": args.spec, "p": list(p), "q": list(q)}
    if _on_boundary(spec, p) or _on_boundary(spec, q):
        b = boundary_distance(spec, p, q, args.tol)
        payload.update({"distance": b.value, "method": "boundary-extrapolation", "error": b.error})
    else:
        payload.update({"distance": distance(spec, p, q, args.tol), "method": "shooting"})
        if args.oracle_resolution:
            _log(args, f"oracle at resolution {args.oracle_resolution}")
            payload["oracle"] = oracle_distance(spec, p, q, args.oracle_resolution)
    emit_report(payload, args.format, args.output,
                columns=[k for k in payload if k not in ("p", "q")])
    return EXIT_OK


def _cmd_geodesic(args) -> int:
    spec = _make_spec(args)
    want = 3 if isinstance(spec, SphereDWP) else 2
    if len(args.start) != want:
        raise UsageError(f"--start: expected {want} coordinates for --spec {args.spec}, got {len(args.start)}")
    res = geodesic_ivp(spec, tuple(args.start), args.c_alpha, args.c_beta, args.sign, args.max_len, args.tol)
    if args.format == "csv":
        rows = [{"s": s, "r": u, "alpha": a, "beta": b} for s, u, a, b in res.samples]
        emit_report(rows, "csv", args.output, columns=("s", "r", "alpha", "beta"))
    else:
        emit_report({"spec": args.spec, "length": res.length, "converged": res.converged,
                     "clairaut": list(res.clairaut), "clairaut_drift": res.clairaut_drift,
                     "turning_points": res.turning_points,
                     "end": [float(x) for x in res.samples[-1, 1:]]}, "json", args.output)
    if not res.converged:
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if any(b < a for a, b in zip(args.lambdas, args.lambdas[1:])):
        raise UsageError("--lambdas: must be nondecreasing")
    reports = gh_lab.convergence_sweep(args.n, args.m, args.lambdas, args.eps, args.seed, args.workers)
    rows = [r.csv_row() for r in reports]
    emit_report(rows, args.format, args.output, columns=gh_lab.SWEEP_COLUMNS)
    return EXIT_OK


def _cmd_probe(args) -> int:
    eps = args.eps_list
    if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])):
        raise UsageError("--eps-list: need >= 3 strictly decreasing values")
    spec = _make_spec(args)
    res = gh_lab.dimension_probe(spec, args.region, eps, args.tol, args.workers)
    if args.format == "csv":
        emit_report(res.csv_rows(), "csv", args.output, columns=gh_lab.PROBE_COLUMNS)
    else:
        emit_report({"slope": res.slope, "residual": res.residual, "unreliable": res.unreliable,
                     "rows": res.csv_rows()}, "json", args.output)
    return EXIT_OK


def _cmd_tangent(args) -> int:
    sc = args.scales
    if any(s > 0.1 for s in sc) or any(b >= a for a, b in zip(sc, sc[1:])):
        raise UsageError("--scales: need strictly decreasing values, each <= 0.1")
    rep = gh_lab.tangent_cone_check(args.n, sc, args.tol)
    if args.format == "csv":
        emit_report(rep.csv_rows(args.variant), "csv", args.output, columns=gh_lab.TANGENT_COLUMNS)
    else:
        emit_report({"anisotropic": rep.csv_rows("anisotropic"), "isotropic": rep.csv_rows("isotropic")},
                    "json", args.output)
    return EXIT_OK


HANDLERS = {
    "eval": _cmd_eval,
    "curvature": _cmd_curvature,
    "certify": _cmd_certify,
    "registry": _cmd_registry,
    "dist": _cmd_dist,
    "geodesic": _cmd_geodesic,
    "gh-sweep": _cmd_sweep,
    "probe-dim": _cmd_probe,
    "tangent-cone": _cmd_tangent,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
