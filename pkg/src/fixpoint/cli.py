"""Command-line front end: ``fixpoint analyze | certify | solve PROBLEM.json``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .coupled_tripled import TripledProblem, check_mixed_monotone, solve_tripled
from .errors import EXIT_CODES, FixpointError, MaxIterExceeded, SchemaError
from .nonneg_matrix import (
    characterize,
    decide_normality,
    neumann_inverse,
    nu_bracket,
    witness_lambda,
)
from .norms import renorming_from_certificate
from .perov import perov_solve, sample_comparable_pairs, verify_vector_contraction
from .problems import build, read_problem
from .report import REPORT_VERSION, canonical_hash, dumps, write_atomic

log = logging.getLogger("fixpoint")

LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging():
    level = LOG_LEVELS.get(os.environ.get("FIXPOINT_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _renorming_checks(A: np.ndarray, ren, rng: np.random.Generator, samples: int = 100) -> dict:
    n = A.shape[0]
    pos = rng.random((samples, n)) * 10.0
    contraction = max(ren.norm(A @ x) - ren.alpha * ren.norm(x) for x in pos)
    signed = rng.standard_normal((samples, n)) * 10.0
    lower = max(ren.beta * ren.norm(x) - np.abs(x).sum() for x in signed)
    upper = max(np.abs(x).sum() - ren.gamma * ren.norm(x) for x in signed)
    return {
        "samples": samples,
        "contraction_slack_max": float(contraction),
        "equivalence_lower_slack_max": float(lower),
        "equivalence_upper_slack_max": float(upper),
    }


def _require_kind(pf, kinds, command):
    if pf.kind not in kinds:
        raise SchemaError(f"{command} needs kind in {list(kinds)}, got {pf.kind!r}")


def cmd_analyze(pf, args) -> dict:
    _require_kind(pf, ("matrix",), "analyze")
    M = build(pf)
    tol = pf.options["tol"]
    ch = characterize(M, spectral_tol=tol)
    verdict = decide_normality(M)
    lo, hi = nu_bracket(M, tol)
    out = {
        "matrix": M.to_dict(),
        "normal": verdict.normal,
        "characterizations": ch.to_dict(),
        "verdict": verdict.to_dict(),
        "nu": {"estimate": 0.5 * (lo + hi), "lower": lo, "upper": hi},
        "renorming": None,
        "renorming_checks": None,
        "neumann_inverse": None,
    }
    if verdict.normal:
        ren = renorming_from_certificate(M.entries, verdict.certificate)
        S = neumann_inverse(M, tol)
        rng = np.random.default_rng(args.seed)
        out["renorming"] = ren.to_dict()
        out["renorming_checks"] = _renorming_checks(M.entries, ren, rng)
        out["neumann_inverse"] = {
            "tol": tol,
            "inverse": S.to_dict(),
            "residual_norm_1": float(np.abs((np.eye(M.n) - M.entries) @ S.entries - np.eye(M.n)).sum(axis=0).max()),
        }
    return out


def cmd_certify(pf, args) -> dict:
    _require_kind(pf, ("matrix",), "certify")
    M = build(pf)
    tol = pf.options["tol"]
    lo, hi = nu_bracket(M, tol)
    verdict = decide_normality(M)
    out = {
        "matrix": M.to_dict(),
        "nu": {"estimate": 0.5 * (lo + hi), "lower": lo, "upper": hi},
        "normal": verdict.normal,
        "verdict": verdict.to_dict(),
        "lambda_test": None,
    }
    if args.lam is not None:
        z = witness_lambda(M, args.lam)
        out["lambda_test"] = {
            "lambda": args.lam,
            "witnessed": z is not None,
            "witness": None if z is None else list(z),
        }
    return out


def _solve_system(pf, args) -> dict:
    system, A = build(pf)
    opts = pf.options
    run = perov_solve(system, A, opts["tol"], opts["max_iter"])
    rng = np.random.default_rng(args.seed)
    scale = 1.0 + float(np.abs(system.start).max())
    pairs = sample_comparable_pairs(system.space, rng, 32, system.start, scale)
    from .perov import associate_selfmap

    check = verify_vector_contraction(associate_selfmap(system), system.space, A, pairs)
    if not check.ok:
        log.warning("sampled vector contraction check failed on %d pair(s)", len(check.violations))
    return {
        "fixed_point": run.fixed_point,
        "contraction_matrix": A.to_dict(),
        "certificate": run.extras["certificate"].to_dict(),
        "renorming": run.extras["renorming"].to_dict(),
        "requested_tol": run.extras["requested_tol"],
        "contraction_check": check.to_dict(),
        "run": run.to_dict(args.trace_every),
    }


def _solve_tripled(pf, args) -> dict:
    p: TripledProblem = build(pf)
    opts = pf.options
    rng = np.random.default_rng(args.seed)
    scale = 1.0 + float(np.abs(p.start).max())
    pairs = sample_comparable_pairs(p.space, rng, 32, p.start, scale)
    bad = check_mixed_monotone(p, pairs)
    res = solve_tripled(p, opts["tol"], opts["max_iter"], opts["route"])
    out = {
        "route": res.route,
        "fixed_point": [b.tolist() for b in p.blocks(res.fixed_point)],
        "residuals": res.residuals,
        "contraction_matrix": p.matrix.to_dict(),
        "alpha": p.alpha,
        "mixed_monotone_check": {"samples": len(pairs), "violations": bad},
        "run": res.run.to_dict(args.trace_every),
    }
    if "certificate" in res.run.extras:
        out["certificate"] = res.run.extras["certificate"].to_dict()
        out["renorming"] = res.run.extras["renorming"].to_dict()
    if res.cross_run is not None:
        out["cross_check"] = {
            "route": "max_metric",
            "fixed_point": [b.tolist() for b in p.blocks(res.cross_run.fixed_point)],
            "residuals": res.cross_residuals,
            "route_gap": res.route_gap,
            "run": res.cross_run.to_dict(args.trace_every),
        }
    return out


def cmd_solve(pf, args) -> dict:
    _require_kind(pf, ("linear_system", "system", "tripled", "coupled"), "solve")
    if pf.kind in ("tripled", "coupled"):
        return _solve_tripled(pf, args)
    return _solve_system(pf, args)


COMMANDS = {"analyze": cmd_analyze, "certify": cmd_certify, "solve": cmd_solve}


def run(args) -> tuple[int, dict]:
    t0 = time.perf_counter()
    report = {
        "report_version": REPORT_VERSION,
        "artifact_version": __version__,
        "command": args.command,
        "input": None,
        "status": "error",
        "exit_code": None,
        "result": None,
        "warnings": [],
        "error": None,
        "wall_time": 0.0,
    }
    code = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            pf = read_problem(args.path)
            for key, val in (("tol", args.tol), ("max_iter", args.max_iter), ("route", args.route)):
                if val is not None:
                    pf.options[key] = val
            if args.out is None and pf.options.get("output"):
                args.out = pf.options["output"]
            report["input"] = {
                "sha256": canonical_hash({"kind": pf.kind, "payload": pf.payload}),
                "kind": pf.kind,
                "payload": pf.payload,
                "options": {k: v for k, v in pf.options.items() if k != "output"},
                "seed": args.seed,
            }
            report["result"] = COMMANDS[args.command](pf, args)
            report["status"] = "ok"
        except FixpointError as exc:
            code = exc.exit_code
            report["error"] = {"type": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, MaxIterExceeded) and exc.run is not None:
                report["result"] = {"run": exc.run.to_dict(args.trace_every)}
    report["warnings"] = [f"{w.category.__name__}: {w.message}" for w in caught]
    report["exit_code"] = code
    report["wall_time"] = time.perf_counter() - t0
    return code, report


def summarize(report: dict) -> str:
    lines = [f"fixpoint {report['command']}: {report['status']}"]
    if report["error"]:
        lines.append(f"  error: {report['error']['type']}: {report['error']['message']}")
    res = report["result"] or {}
    if "characterizations" in res:
        c = res["characterizations"]
        lines.append(f"  normal: {res['normal']}  (elimination={c['matkowski']}, minors={c['admissible']}, "
                     f"spectral={c['spectral']}, powers={c['asymptotic']})")
        s = c["spectral_estimate"]
        lines.append(f"  spectral radius in [{s['lower']:.12g}, {s['upper']:.12g}]")
    if "nu" in res:
        lines.append(f"  nu ~ {res['nu']['estimate']:.12g}")
    if res.get("verdict") and res["verdict"]["certificate"] is not None:
        lines.append(f"  certificate z = {[float(f'{v:.12g}') for v in res['verdict']['certificate']]}")
    if res.get("lambda_test"):
        t = res["lambda_test"]
        lines.append(f"  Az <= {t['lambda']} z: {'witnessed' if t['witnessed'] else 'refused'}")
    if res.get("fixed_point") is not None:
        lines.append(f"  fixed point: {np.asarray(res['fixed_point']).tolist()}")
        lines.append(f"  steps: {res['run']['steps']}")
    for w in report["warnings"]:
        lines.append(f"  warning: {w}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    codes = "\n".join(f"  {v:>3}  {k}" for k, v in sorted(EXIT_CODES.items(), key=lambda kv: kv[1]))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("path", help="problem file (JSON)")
    common.add_argument("--tol", type=float, default=None, help="accuracy target (default 1e-10)")
    common.add_argument("--max-iter", type=int, default=None, help="iteration cap (default 1e6)")
    common.add_argument("--route", choices=("vector", "max_metric", "both"), default=None,
                        help="tripled/coupled solve route (default vector)")
    common.add_argument("--out", default=None, help="write the JSON report here (atomically)")
    common.add_argument("--trace-every", type=int, default=1, help="keep every k-th iterate in the report")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling-based checks")
    common.add_argument("--json", action="store_true", help="print the report JSON instead of a summary")

    parser = argparse.ArgumentParser(
        prog="fixpoint",
        description="Normality certificates for nonnegative matrices and certified Picard solvers.",
        epilog="exit codes:\n" + codes + "\n\nset FIXPOINT_LOG=quiet|info|debug for logging",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"fixpoint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="run all normality tests on a matrix")
    cert = sub.add_parser("certify", parents=[common], help="estimate nu(A) and emit a certificate")
    cert.add_argument("--lambda", dest="lam", type=float, default=None,
                      help="test whether Az <= lambda z is witnessable")
    sub.add_parser("solve", parents=[common], help="solve a linear, general, tripled or coupled problem")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "lam"):
        args.lam = None
    configure_logging()
    code, report = run(args)
    text = dumps(report)
    if args.out:
        write_atomic(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(summarize(report))
    if code:
        print(f"error: {report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
