"""Command-line front end.

Verbs: solve, sweep, check, kernel, verify.  Exit codes are a stable
contract: 0 success, 1 input error, 2 the continuation found no bracket,
3 a hypothesis or verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io
from .errors import NoBracket
from .hypotheses import run_check
from .kernels import dk_hat_dt, k_hat
from .solver import find_pair, sweep
from .verify import verify_pair

log = logging.getLogger("fbvp")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_BRACKET = 2
EXIT_CHECK_FAILED = 3


def _configure_logging():
    level = os.environ.get("FBVP_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def _load_problem(path):
    try:
        return io.load_problem(path)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    except FileNotFoundError as exc:
        raise ValueError(str(exc))


def cmd_solve(args):
    try:
        p, opts, doc = _load_problem(args.problem)
        if args.rho <= 0:
            raise ValueError(f"rho must be positive, got {args.rho}")
    except ValueError as exc:
        return _fail(exc)

    hyp = None
    if args.with_check:
        hyp = run_check(p, args.rho, n=args.samples, seed=args.seed)
    try:
        pair = find_pair(p, args.rho, opts=opts)
    except NoBracket as nb:
        rep = io.solve_report(p, doc, args.rho, failure=nb, hypotheses=hyp)
        io.write_json(args.out, rep)
        print(f"no bracket: {nb.reason} (last lambda={nb.lambda_last:.6g}, "
              f"N={nb.norm_last:.6g}); report written to {args.out}", file=sys.stderr)
        return EXIT_NO_BRACKET

    ver = verify_pair(p, pair.lambda_star, pair.u_star)
    rep = io.solve_report(p, doc, args.rho, pair=pair, verification=ver, hypotheses=hyp)
    io.write_json(args.out, rep)
    print(f"lambda_star={pair.lambda_star:.12g} residual={pair.residual:.3e} "
          f"verified={ver.passed}")
    return EXIT_OK


def cmd_sweep(args):
    try:
        p, opts, _ = _load_problem(args.problem)
        if args.lambda_max <= 0:
            raise ValueError("lambda-max must be positive")
        if args.steps < 0:
            raise ValueError("steps must be non-negative")
    except ValueError as exc:
        return _fail(exc)
    lambdas = np.linspace(0.0, args.lambda_max, args.steps + 1) if args.steps > 0 else []
    rows = sweep(p, lambdas, opts=opts, parallel=args.parallel)
    try:
        io.write_csv(args.out, ["lambda", "N", "residual", "converged"],
                     [[r.lam, r.norm, r.residual, str(r.converged).lower()] for r in rows])
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}")
    return EXIT_OK


def _parse_delta_poly(text):
    try:
        coeffs = [float(c) for c in text.split(",")]
    except ValueError:
        raise ValueError(f"--delta-poly expects comma-separated coefficients, got '{text}'")

    def delta(s):
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), coeffs)

    return delta


def cmd_check(args):
    try:
        p, _, _ = _load_problem(args.problem)
        if args.rho <= 0:
            raise ValueError(f"rho must be positive, got {args.rho}")
        delta = _parse_delta_poly(args.delta_poly) if args.delta_poly else None
        if (args.eta is None) != (delta is None):
            raise ValueError("--eta and --delta-poly must be given together")
        report = run_check(p, args.rho, n=args.samples, seed=args.seed,
                           eta=args.eta, delta=delta)
    except ValueError as exc:
        return _fail(exc)
    text = io.canon_dumps(report.to_dict())
    sys.stdout.write(text)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            return _fail(f"cannot write {args.out}: {exc}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_kernel(args):
    if args.grid_n < 2:
        return _fail("grid-n must be at least 2")
    ts = np.linspace(0.0, 1.0, args.grid_n)
    rows = []
    for t in ts:
        for s in ts:
            rows.append([float(t), float(s),
                         k_hat(args.bc, t, s), dk_hat_dt(args.bc, t, s)])
    try:
        io.write_csv(args.out, ["t", "s", "k", "dk_dt"], rows)
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_verify(args):
    try:
        p, _, lam, u, _ = io.load_solution(args.solution)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load solution: {exc}")
    if args.problem:
        try:
            p, _, _ = _load_problem(args.problem)
        except ValueError as exc:
            return _fail(exc)
    report = verify_pair(p, lam, u)
    sys.stdout.write(io.canon_dumps(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fbvp",
        description="Eigenpair search and hypothesis checking for perturbed "
        "Hammerstein integral equations of third-order delay problems with "
        "functional boundary conditions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="find an eigenpair on the rho-sphere")
    sp.add_argument("--problem", required=True, help="problem JSON path or builtin name")
    sp.add_argument("--rho", type=float, required=True, help="target sphere radius")
    sp.add_argument("--out", required=True, help="output report path (JSON)")
    sp.add_argument("--with-check", action="store_true",
                    help="embed a hypothesis report in the output")
    sp.add_argument("--samples", type=int, default=200, help="sphere samples for --with-check")
    sp.add_argument("--seed", type=int, default=0, help="sampling seed")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="tabulate the norm response over lambda")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--lambda-max", type=float, required=True, dest="lambda_max")
    sp.add_argument("--steps", type=int, required=True,
                    help="number of steps; rows at lambda = linspace(0, max, steps+1)")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("--parallel", action="store_true",
                    help="evaluate rows independently (disables warm starts)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("check", help="verify the existence-theorem hypotheses")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--eta", type=float, default=None,
                    help="override lower bound for B (requires --delta-poly)")
    sp.add_argument("--delta-poly", default=None,
                    help="override lower bound for F: comma-separated polynomial "
                    "coefficients in s, lowest order first (e.g. '0,1' for delta(s)=s)")
    sp.add_argument("--out", default=None, help="also write the report to this path")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("kernel", help="dump kernel values on a square grid")
    sp.add_argument("--bc", type=int, required=True, choices=(1, 2, 3))
    sp.add_argument("--grid-n", type=int, required=True, dest="grid_n",
                    help="points per axis (inclusive of both ends)")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("verify", help="re-verify a solve report independently")
    sp.add_argument("--solution", required=True, help="solve report JSON")
    sp.add_argument("--problem", default=None,
                    help="optional problem file overriding the embedded one")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


def app():
    raise SystemExit(main())
