"""Command-line front end.

Exit codes: 0 success, 1 a check or verification failed, 2 usage or range
error, 3 numerical failure (quadrature did not converge).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from . import asymmetry as asy
from . import copulas as cop
from . import shockmodels as shock
from . import verification as ver
from .gridfield import GridField, format_number, write_rows
from .numerics import INTEGRAL_TOL, SUP_TOL, QuadratureError, Tolerance

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_BOUND_FNS = {
    "marshall": (asy.marshall_mu_p_bound, asy.mu_p_c23_closed),
    "maxmin": (asy.maxmin_mu_p_bound, asy.mu_p_c23_closed),
    "rmm": (asy.rmm_mu_p_bound, asy.mu_p_E_closed),
}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse normally prints and calls sys.exit; raising keeps run() pure
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not p >= 1.0:
        raise argparse.ArgumentTypeError("p must be >= 1 or inf")
    return p


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return v


def _at_least(lo: int):
    def conv(text: str) -> int:
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return v
    return conv


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _add_copula(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--copula", help="inline 'kind:p1,p2' or a JSON document")
    g.add_argument("--copula-file", help="path to a JSON copula document")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="copula-asym", description="Copula asymmetry toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate C(x, y)")
    _add_copula(p)
    p.add_argument("--x", type=_unit, required=True)
    p.add_argument("--y", type=_unit, required=True)

    p = sub.add_parser("check", help="copula axioms and quadrant class on a grid")
    _add_copula(p)
    p.add_argument("--grid", type=_at_least(2), default=101)

    p = sub.add_parser("dstar", help="export the maximal asymmetry field as CSV")
    p.add_argument("--family", required=True)
    p.add_argument("--grid", type=_at_least(2), default=101)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mu", help="L_p asymmetry measure")
    _add_copula(p)
    p.add_argument("--p", type=_parse_p, required=True)
    p.add_argument("--tol", type=_positive_float, default=None)

    p = sub.add_parser("bounds", help="export mu_p bound curves as CSV")
    p.add_argument("--family", required=True, choices=sorted(_BOUND_FNS))
    p.add_argument("--p-min", type=_parse_p, default=1.0)
    p.add_argument("--p-max", type=_parse_p, default=10.0)
    p.add_argument("--steps", type=_at_least(1), default=50)
    p.add_argument("--out", required=True)

    p = sub.add_parser("witness", help="a family member attaining dstar at (x, y)")
    p.add_argument("--family", required=True)
    p.add_argument("--x", type=_unit, required=True)
    p.add_argument("--y", type=_unit, required=True)

    p = sub.add_parser("sample", help="shock-model scatter as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--n", type=_at_least(1), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="run the acceptance suites")
    p.add_argument("--suite", default="all", choices=sorted(ver.SUITES))
    return parser


def _load_copula(args) -> cop.Copula:
    if args.copula_file is not None:
        with open(args.copula_file, encoding="utf-8") as fh:
            return cop.from_dict(json.load(fh))
    text = args.copula.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad copula JSON: {exc}") from None
        return cop.from_dict(doc)
    return cop.parse_inline(text)


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        return
    # newline="" keeps the bytes identical across platforms
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _emit_json(out, doc) -> None:
    out.write(json.dumps(doc, sort_keys=False) + "\n")


def _validate(args) -> None:
    """Range checks that need more than one option or a lookup."""
    if args.command in ("dstar", "witness"):
        asy.family_tag(args.family)
    if args.command == "witness":
        if not (0.0 < args.x < 1.0 and 0.0 < args.y < 1.0) or args.x == args.y:
            raise UsageError("witness needs an interior point with x != y")
    if args.command == "bounds":
        if math.isinf(args.p_min) or math.isinf(args.p_max):
            raise UsageError("bound curves need finite p")
        if args.p_max < args.p_min:
            raise UsageError("--p-max must be >= --p-min")
    if args.command == "sample":
        shock.canonical_model(args.model)


def _cmd_eval(args, out) -> int:
    c = _load_copula(args)
    out.write(format_number(cop.eval_copula(c, args.x, args.y)) + "\n")
    return EXIT_OK


def _cmd_check(args, out) -> int:
    c = _load_copula(args)
    axioms = cop.check_axioms(c, args.grid)
    quadrant = cop.classify_quadrant(c, args.grid)
    _emit_json(out, {"axioms": axioms.to_dict(), "passed": axioms.passed,
                     "quadrant": quadrant.to_dict()})
    return EXIT_OK if axioms.passed else EXIT_FAIL


def _cmd_dstar(args, out) -> int:
    field = GridField.sample(asy.dstar_field(args.family), args.grid)
    with _open_out(args.out) as fh:
        field.write_csv(fh)
    return EXIT_OK


def _cmd_mu(args, out) -> int:
    c = _load_copula(args)
    tol = None
    if args.tol is not None:
        base = SUP_TOL if math.isinf(args.p) else INTEGRAL_TOL
        tol = Tolerance(args.tol, 0.0, base.max_refinements)
    _emit_json(out, asy.mu_p(c, args.p, tol).to_dict())
    return EXIT_OK


def _cmd_bounds(args, out) -> int:
    bound, example = _BOUND_FNS[args.family]
    if args.steps == 1:
        ps = [args.p_min]
    else:
        ps = list(np.linspace(args.p_min, args.p_max, args.steps))

    def row(p):
        return (p, bound(p), example(p))

    threads = ver.thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, ps))
    else:
        rows = [row(p) for p in ps]
    with _open_out(args.out) as fh:
        write_rows(fh, ("p", "bound", "closed_form_example"), rows)
    return EXIT_OK


def _cmd_witness(args, out) -> int:
    c = asy.attainment_witness(args.family, args.x, args.y)
    diff = abs(float(c(args.x, args.y)) - float(c(args.y, args.x)))
    target = float(asy.dstar(args.family, args.x, args.y))
    _emit_json(out, {"family": asy.family_tag(args.family).value, "x": args.x, "y": args.y,
                     "copula": c.to_dict(), "difference": diff, "dstar": target,
                     "residual": abs(diff - target)})
    return EXIT_OK


def _cmd_sample(args, out) -> int:
    spec = shock.build_spec(args.model, mu=args.mu, lam=args.lam)
    s = shock.sample(spec, args.n, args.seed)
    with _open_out(args.out) as fh:
        write_rows(fh, ("u", "v", "cu", "cv"), zip(s.u, s.v, s.cu, s.cv))
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    results = ver.run_suite(args.suite)
    for r in results:
        out.write(r.line() + "\n")
    passed = sum(r.passed for r in results)
    out.write(f"{passed}/{len(results)} criteria passed\n")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


_COMMANDS = {
    "eval": _cmd_eval, "check": _cmd_check, "dstar": _cmd_dstar, "mu": _cmd_mu,
    "bounds": _cmd_bounds, "witness": _cmd_witness, "sample": _cmd_sample,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        ver.thread_count()
        _validate(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ValueError, KeyError) as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except QuadratureError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
