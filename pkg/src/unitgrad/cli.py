"""
Command-line front end.

    unitgrad check   --field SPEC --box LO...,HI... [--mode convex|concave]
    unitgrad field   --graph parabola --box -2,-2,2,2 --nx 200 --ny 200 --out dist.csv [--pgm dist.pgm]
    unitgrad witness --field SPEC --radius 1 --out report.json
    unitgrad zoo

Exit status: 0 on success, 1 when a verdict contradicts the field's claimed
properties, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .distfield import emit_grid, parabola_graph
from .numcore import ZOO, Ball, Box, DimensionError, Tolerances, parse_field_spec
from .witness import classify_field, contradicts_claims, witness_report

GRAPHS = {"parabola": parabola_graph}
# flags whose values may start with '-' (negative coordinates)
_VECTOR_FLAGS = ("--box", "--ball")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_tolerance_flags(p):
    d = Tolerances()
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-grad", type=float, default=d.tol_grad_norm, help="gradient-norm tolerance")
    p.add_argument("--tol-res", type=float, default=d.tol_residual, help="solver residual tolerance")
    p.add_argument("--tol-equal", type=float, default=d.tol_equal, help="equality tolerance")
    p.add_argument("--fd-step", type=float, default=d.fd_step, help="finite-difference step")
    p.add_argument("--margin", type=float, default=d.singular_margin, help="singular-locus margin")


def _add_domain_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--box", type=_floats, help="lo_1,...,lo_n,hi_1,...,hi_n")
    g.add_argument("--ball", type=_floats, help="c_1,...,c_n,radius")


def build_parser():
    parser = argparse.ArgumentParser(prog="unitgrad", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="classify a zoo field")
    p.add_argument("--field", required=True, help="zoo field spec, e.g. affine:0.6,0.8:1.0")
    _add_domain_flags(p)
    p.add_argument("--mode", choices=("convex", "concave"), default="convex")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", help="write the witness report (JSON) here")
    _add_tolerance_flags(p)

    p = sub.add_parser("field", help="sample a graph distance field on a grid")
    p.add_argument("--graph", choices=sorted(GRAPHS), default="parabola")
    p.add_argument("--box", type=_floats, default=[-2.0, -2.0, 2.0, 2.0], help="lo1,lo2,hi1,hi2")
    p.add_argument("--nx", type=int, default=200)
    p.add_argument("--ny", type=int, default=200)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--pgm", help="optional PGM image output path")
    p.add_argument("--pgm-column", choices=("value", "gradnorm"), default="value")
    _add_tolerance_flags(p)

    p = sub.add_parser("witness", help="run every proof-step probe and write a JSON report")
    p.add_argument("--field", required=True)
    _add_domain_flags(p)
    p.add_argument("--radius", type=float, action="append", help="fixed-point radius (repeatable)")
    p.add_argument("--mode", choices=("convex", "concave"), default="convex")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    sub.add_parser("zoo", help="list available field specs")
    return parser


def _normalize_argv(argv):
    out = []
    it = iter(argv)
    for a in it:
        if a in _VECTOR_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _tolerances(args):
    return Tolerances(
        tol_grad_norm=args.tol_grad,
        tol_residual=args.tol_res,
        tol_equal=args.tol_equal,
        fd_step=args.fd_step,
        singular_margin=args.margin,
    )


def _domain(args, dim_hint):
    if args.ball:
        return Ball(args.ball[:-1], args.ball[-1])
    if args.box:
        if len(args.box) % 2:
            raise ValueError("--box needs an even number of values")
        k = len(args.box) // 2
        return Box(args.box[:k], args.box[k:])
    n = dim_hint or 2
    return Box(-2.0 * np.ones(n), 2.0 * np.ones(n))


def _field_and_domain(args):
    dim = None
    if args.box:
        dim = len(args.box) // 2
    elif args.ball:
        dim = len(args.ball) - 1
    field = parse_field_spec(args.field, dim=dim)
    return field, _domain(args, field.dim)


def _print_config(args, tol, out):
    settings = " ".join(f"{k}={v:g}" for k, v in tol.as_dict().items())
    print(f"seed={args.seed} {settings}", file=out)


def _cmd_check(args, tol, out):
    field, domain = _field_and_domain(args)
    verdict = classify_field(field, domain, tol, mode=args.mode, seed=args.seed, n_samples=args.samples)
    summary = verdict.report.to_dict()["verdict"]
    print(f"field={field.label} verdict={verdict.kind}", file=out)
    print(f"params={summary['params']}", file=out)
    print(f"evidence={summary['evidence']}", file=out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(verdict.report.to_json())
    return 1 if contradicts_claims(field, verdict.kind, args.mode) else 0


def _cmd_field(args, tol, out):
    box = args.box
    if len(box) != 4:
        raise ValueError("--box for field needs lo1,lo2,hi1,hi2")
    grid = emit_grid(GRAPHS[args.graph](), box[:2], box[2:], args.nx, args.ny, tol=tol, seed=args.seed)
    grid.write_csv(args.out)
    print(f"wrote {args.nx * args.ny} records to {args.out}", file=out)
    if args.pgm:
        grid.write_pgm(args.pgm, args.pgm_column)
        print(f"wrote {args.pgm_column} image to {args.pgm}", file=out)
    return 0


def _cmd_witness(args, tol, out):
    field, domain = _field_and_domain(args)
    radii = args.radius or [1.0]
    report = witness_report(field, domain, radii, tol, mode=args.mode, seed=args.seed, n_samples=args.samples)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    kind = report.verdict["kind"]
    devs = [r["deviation"] for r in report.rays if "deviation" in r]
    print(f"field={field.label} verdict={kind} max_ray_deviation={max(devs, default=float('nan')):.6g}", file=out)
    print(f"wrote report to {args.out}", file=out)
    return 1 if contradicts_claims(field, kind, args.mode) else 0


def _cmd_zoo(args, out):
    for name in sorted(ZOO):
        print(ZOO[name], file=out)
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "zoo":
        return _cmd_zoo(args, out)
    try:
        tol = _tolerances(args)
        _print_config(args, tol, out)
        handler = {"check": _cmd_check, "field": _cmd_field, "witness": _cmd_witness}[args.command]
        return handler(args, tol, out)
    except (ValueError, DimensionError) as exc:
        parser.print_usage(sys.stderr)
        print(f"unitgrad: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"unitgrad: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
