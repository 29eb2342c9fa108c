"""Command-line front end; every subcommand prints one JSON document.

Exit codes: 0 success, 2 certification failed, 3 solver exhausted,
4 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from contextlib import contextmanager

from . import classifier, nodal_curves, residue_system, spin_solver
from .errors import InvalidInput, RSpinError, SolverExhausted
from .numerics import TolerancePolicy
from .spin_solver import SpinData

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_CERT_FAILED = 2
EXIT_SOLVER = 3
EXIT_INVALID = 4

log = logging.getLogger("rspin")


class _Timer:
    def __init__(self, enabled):
        self.enabled = enabled
        self.phases = {}

    @contextmanager
    def phase(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            if self.enabled:
                self.phases[name] = round(1000 * (time.perf_counter() - start), 3)


def parse_weights(text):
    text = (text or "").strip()
    if not text:
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise InvalidInput(f"--m expects a comma-separated list of integers, got {text!r}") from exc


def document(mode, input_echo, result, pol, seed, timer):
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": mode,
        "input": input_echo,
        "result": result,
        "tolerances": pol.to_json(),
        "seed": seed,
        "timings": timer.phases,
    }


def _policy(args):
    return TolerancePolicy.from_env(
        residual_tol=getattr(args, "tol", None),
        rank_cutoff=getattr(args, "rank_cutoff", None),
        distinct_margin=getattr(args, "margin", None),
        fd_step=getattr(args, "fd_step", None),
    )


def _spin_data(args):
    return SpinData(args.g, args.r, parse_weights(args.m), args.d)


def cmd_solve(args, pol, timer):
    sd = _spin_data(args)
    with timer.phase("solve"):
        sol = spin_solver.solve(sd, pol, args.seed, args.budget)
    with timer.phase("recertify"):
        res_ok, rank_ok = spin_solver.recertify(sd, sol, pol)
    passed = res_ok and rank_ok
    result = {
        "solution": sol.to_json(),
        "condition1_ok": res_ok,
        "condition2_ok": rank_ok,
        "verdict": "pass" if passed else "fail",
    }
    return sd.to_json(), result, EXIT_OK if passed else EXIT_CERT_FAILED


def cmd_build_nodal(args, pol, timer):
    sd = _spin_data(args)
    with timer.phase("build"):
        curve = nodal_curves.build_nodal(sd, pol, args.seed, args.budget)
    with timer.phase("certify"):
        cert = nodal_curves.certify(curve, sd, pol)
    result = {"certificate": cert.to_json(), "curve": curve.to_json()}
    return sd.to_json(), result, EXIT_OK if cert.passed else EXIT_CERT_FAILED


def load_curve(path, pol):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read curve JSON from {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInput("curve JSON must be an object")
    seed = 0
    if "result" in data and isinstance(data["result"], dict) and "curve" in data["result"]:
        seed = data.get("seed", 0)
        data = data["result"]["curve"]
    curve = nodal_curves.NodalCurve.from_json(data, pol)
    if curve.spin_data is None:
        raise InvalidInput("curve JSON has no spin_data")
    return curve, seed


def cmd_certify(args, pol, timer):
    curve, seed = load_curve(args.infile, pol)
    args.seed = seed
    with timer.phase("certify"):
        cert = nodal_curves.certify(curve, curve.spin_data, pol)
    return curve.spin_data.to_json(), {"certificate": cert.to_json()}, \
        EXIT_OK if cert.passed else EXIT_CERT_FAILED


def cmd_classify(args, pol, timer):
    sd = _spin_data(args)
    verdict = classifier.classify(sd)
    return sd.to_json(), verdict.to_json(), EXIT_OK


def cmd_dim(args, pol, timer):
    sd = _spin_data(args)
    return sd.to_json(), {"dimension": classifier.dimension(sd)}, EXIT_OK


def cmd_jacobian_report(args, pol, timer):
    w = residue_system.StratumWeights(parse_weights(args.m), args.g)
    x = residue_system.choose_x(args.g, args.spread)
    with timer.phase("report"):
        report = residue_system.residue_system_report(w, x, pol)
    echo = {"g": args.g, "m": list(w.weights), "spread": args.spread}
    return echo, report.to_json(), EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "build-nodal": cmd_build_nodal,
    "certify": cmd_certify,
    "classify": cmd_classify,
    "dim": cmd_dim,
    "jacobian-report": cmd_jacobian_report,
}


class _Parser(argparse.ArgumentParser):
    """Usage errors become ``InvalidInput`` so they share exit code 4."""

    def error(self, message):
        raise InvalidInput(f"{self.prog}: {message}")


def _finite(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def build_parser():
    parser = _Parser(prog="rspin", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def tolerances(p):
        p.add_argument("--tol", type=float, help="relative residual tolerance")
        p.add_argument("--rank-cutoff", type=float)
        p.add_argument("--margin", type=float, help="relative distinctness margin")
        p.add_argument("--fd-step", type=float)
        p.add_argument("--timings", action="store_true",
                       help="record per-phase timings (makes output nondeterministic)")

    def spin(p, needs_r=True):
        p.add_argument("--g", type=int, required=True)
        if needs_r:
            p.add_argument("--r", type=int, required=True)
        p.add_argument("--m", default="", help='comma-separated weights; "" for none')
        p.add_argument("--d", type=int)

    for name in ("solve", "build-nodal"):
        p = sub.add_parser(name)
        spin(p)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=spin_solver.DEFAULT_BUDGET)
        tolerances(p)

    p = sub.add_parser("certify")
    p.add_argument("--in", dest="infile", required=True)
    tolerances(p)

    for name in ("classify", "dim"):
        p = sub.add_parser(name)
        spin(p)
        tolerances(p)

    p = sub.add_parser("jacobian-report")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--m", default="")
    p.add_argument("--spread", type=float, default=10.0)
    tolerances(p)
    return parser


def run(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except InvalidInput as exc:
        doc = document(None, None, {"error": "InvalidInput", "message": str(exc)},
                       TolerancePolicy(), None, _Timer(False))
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    timer = _Timer(getattr(args, "timings", False))
    seed = getattr(args, "seed", None)
    pol = TolerancePolicy()
    try:
        pol = _policy(args)
        echo, result, code = COMMANDS[args.command](args, pol, timer)
        seed = getattr(args, "seed", None)
    except InvalidInput as exc:
        log.error("%s", exc)
        echo, code = None, EXIT_INVALID
        result = {"error": type(exc).__name__, "message": str(exc)}
    except SolverExhausted as exc:
        log.error("%s", exc)
        echo, code = None, EXIT_SOLVER
        result = {"error": type(exc).__name__, "message": str(exc), "attempts": exc.attempts}
    except RSpinError as exc:
        log.error("%s", exc)
        echo, code = None, EXIT_SOLVER
        result = {"error": type(exc).__name__, "message": str(exc)}
    doc = _finite(document(args.command, echo, result, pol, seed, timer))
    out.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")
    out.flush()
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
