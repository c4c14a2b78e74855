"""Command-line front end.

Exit status: 0 pass, 1 verdict failed, 2 usage or input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .constructors import build
from .errors import NUMERIC_ERRORS, BellShapeError, NotAdmissible
from .genfunc import CLOSED_FORMS, CircleEvaluator, boundary_phi
from .inversion import post_invert
from .phi import (
    check_admissible,
    check_boundary_mass,
    classify_infinitely_divisible,
    classify_powers_bellshaped,
    pf_amcm_split,
    wiener_hopf_split,
)
from .sequences import verify_bell_shaped
from .walks import (
    LATTICES,
    WalkSpec,
    closed_index_shift,
    hitting_pmf,
    rrw_phi_function,
    rw_phi_function,
    walk_evaluator,
    walk_rep,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = float(v)
    return out


def _sequence(args):
    if getattr(args, "spec", None):
        return build(io.read_json(_existing(args.spec)))
    if getattr(args, "seq", None):
        return io.read_sequence(_existing(args.seq))
    raise UsageError("one of --spec or --seq is required")


def _evaluator(args) -> CircleEvaluator:
    if getattr(args, "rep", None):
        return CircleEvaluator.from_rep(io.read_rep(_existing(args.rep)))
    if getattr(args, "closed", None):
        if args.closed not in CLOSED_FORMS:
            raise UsageError(f"unknown closed form {args.closed!r}; known: {sorted(CLOSED_FORMS)}")
        return CircleEvaluator.closed_form(args.closed, **_params(args.param))
    if getattr(args, "const_one", False):
        return CircleEvaluator.closed_form("one")
    return CircleEvaluator.from_sequence(_sequence(args))


def _out(args):
    return open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout


def _emit_json(args, obj):
    text = io.dumps(obj)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------


def cmd_construct(args) -> int:
    spec = io.read_json(_existing(args.spec))
    seq = build(spec)
    if args.out:
        io.write_sequence(seq, args.out, meta={"spec": spec})
    else:
        io.write_rows(sys.stdout, ("k", "value"), zip(seq.indices.tolist(), seq.values))
    return EXIT_OK


def cmd_verify(args) -> int:
    seq = _sequence(args)
    report = verify_bell_shaped(seq, args.n_max, args.tol)
    _emit_json(args, report.to_dict())
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_gf_eval(args) -> int:
    F = _evaluator(args)
    n = args.n_points
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    vals = F.on_circle(t)
    fh = _out(args)
    try:
        io.write_rows(fh, ("t", "Re", "Im"), zip(t, vals.real, vals.imag))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _phi_source(args):
    if args.walk:
        rep = walk_rep(args.walk, args.y)
        return rep, walk_evaluator(args.walk, args.y)
    if args.rep:
        rep = io.read_rep(_existing(args.rep))
        return rep, CircleEvaluator.from_rep(rep)
    raise UsageError("one of --walk or --rep is required")


def cmd_phi_probe(args) -> int:
    rep, F = _phi_source(args)
    if args.s:
        s = [float(v) for v in args.s.split(",")]
    else:
        lo, hi, m = args.s_range
        s = np.linspace(float(lo), float(hi), int(m)).tolist()
    rows = []
    for si in s:
        if si == 0:
            continue
        val = boundary_phi(F, si, args.t) if args.mode == "boundary" else float(rep.phi(si))
        rows.append((si, val))
    fh = _out(args)
    try:
        io.write_rows(fh, ("s", "phi"), rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_invert(args) -> int:
    F = _evaluator(args)
    ns = [int(v) for v in args.n_list.split(",")]
    z = complex(math.cos(args.t), math.sin(args.t))
    ref = complex(F(z))
    rows = []
    for n in ns:
        v = post_invert(F, args.t, n, args.T, args.tol)
        rows.append((n, v.real, v.imag, abs(v - ref)))
    fh = _out(args)
    try:
        io.write_rows(fh, ("n", "Re", "Im", "abs_error_vs_direct"), rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_example(args) -> int:
    spec = WalkSpec(args.walk, args.y, args.horizon, args.method)
    pmf = hitting_pmf(spec)
    report = verify_bell_shaped(pmf, args.n_max, args.tol)
    out = {
        "walk": args.walk,
        "y": args.y,
        "horizon": args.horizon,
        "method": args.method,
        "index_map": spec.index_map,
        "closed_form_index_shift": closed_index_shift(args.walk, args.y),
        "deficit": pmf.deficit,
        "mass": float(pmf.values.sum()),
        "verification": report.to_dict(),
    }
    if args.out:
        io.write_sequence(pmf, args.out, meta={"walk": args.walk, "y": args.y})
    else:
        io.write_rows(sys.stdout, ("k", "value"), zip(pmf.indices.tolist(), pmf.values))
    if args.report:
        io.write_json(args.report, out)
    else:
        sys.stderr.write(io.dumps(out))
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_split(args) -> int:
    if args.walk:
        phi = rw_phi_function() if args.walk == "square" else rrw_phi_function()
    elif args.phi:
        phi = io.read_rep(_existing(args.phi)).phi
    else:
        raise UsageError("one of --walk or --phi is required")
    adm = check_admissible(phi)
    bm = check_boundary_mass(phi)
    plus, minus = wiener_hopf_split(phi)
    out = {
        "admissibility": adm.to_dict(),
        "admissible": adm.passed,
        "boundary_mass": {"p": bm.p, "q": bm.q, "passed": bm.passed},
        "wiener_hopf": {"plus": plus.to_dict(), "minus": minus.to_dict()},
        "infinitely_divisible": classify_infinitely_divisible(phi),
        "powers_bellshaped": classify_powers_bellshaped(phi),
    }
    try:
        pf, amcm = pf_amcm_split(phi)
        out["pf_amcm"] = {"pf": pf.to_dict(), "amcm": amcm.to_dict()}
    except NotAdmissible as exc:
        out["pf_amcm"] = {"error": str(exc)}
    _emit_json(args, out)
    return EXIT_OK if (adm.passed and bm.passed) else EXIT_FAIL


# -- parser ----------------------------------------------------------------


def _add_source(p, rep=False, closed=False):
    p.add_argument("--spec", help="construction JSON (family + parameters)")
    p.add_argument("--seq", help="sequence CSV with columns k,value")
    if rep:
        p.add_argument("--rep", help="exponential representation JSON")
    if closed:
        p.add_argument("--closed", help=f"named closed form ({', '.join(sorted(CLOSED_FORMS))})")
        p.add_argument("--param", action="append", help="closed-form parameter key=value")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bellshape", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a sequence from a construction spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", help="CSV path (a .json sidecar is written next to it)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="bell-shape verification by sign-change counting")
    _add_source(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--tol", type=float, default=None, help="default 1e-12·max|a|")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gf-eval", help="generating function on the offset circle grid")
    _add_source(p, rep=True, closed=True)
    p.add_argument("--n-points", type=int, default=256)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gf_eval)

    p = sub.add_parser("phi-probe", help="boundary function φ by argument tracking")
    p.add_argument("--walk", choices=LATTICES)
    p.add_argument("--y", type=int, default=1)
    p.add_argument("--rep")
    p.add_argument("--s", help="comma separated probe points")
    p.add_argument("--s-range", nargs=3, metavar=("LO", "HI", "COUNT"), default=("-3", "8", "45"))
    p.add_argument("--t", type=float, default=1e-6, help="height above the real axis")
    p.add_argument("--mode", choices=("boundary", "closed"), default="boundary")
    p.add_argument("--out")
    p.set_defaults(func=cmd_phi_probe)

    p = sub.add_parser("invert", help="Post-type inversion at e^{it}")
    _add_source(p, rep=True, closed=True)
    p.add_argument("--const-one", action="store_true", help="use F ≡ 1")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n-list", default="4,8,16,24")
    p.add_argument("--T", type=float, default=None, help="truncate the integral at T")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("example", help="lattice-walk hitting distribution")
    p.add_argument("--walk", choices=LATTICES, required=True)
    p.add_argument("--y", type=int, default=1)
    p.add_argument("--horizon", type=int, default=16000)
    p.add_argument("--method", choices=("excursion", "time"), default="excursion")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="pmf CSV")
    p.add_argument("--report", help="verification JSON")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("split", help="admissibility, Wiener-Hopf and PF/AM-CM splits of φ")
    p.add_argument("--walk", choices=LATTICES)
    p.add_argument("--phi", help="φ or representation JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, KeyError, TypeError, json.JSONDecodeError, BellShapeError,
            OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
