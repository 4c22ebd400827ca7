"""Command-line driver: ``gpac <subcommand> ...``.

Subcommands: compile, eval, simulate, circuit, zoo, check-bound, explain.
Sources are PIVP JSON files, circuit JSON files (compiled on the fly) or
expressions given with ``-e``.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import zoo
from .circuit import (circuit_deserialize, circuit_from_json, circuit_serialize, circuit_to_pivp,
                      circuit_validate, pivp_to_circuit)
from .expr import ExprError, compile_expr, parse
from .pivp import PIVP, pivp_deserialize, pivp_from_json, pivp_serialize, pivp_validate
from .simulator import check_bound, evaluate, integrate

VALUE_FLAGS = ("--at", "--path", "--grid", "--base", "--params", "--t0", "--t1")


class UsageError(ValueError):
    """Bad command-line input."""


# ---------------------------------------------------------------------------
# argument helpers

def parse_reals(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_exact(text: str) -> list[Fraction]:
    try:
        return [Fraction(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated exact numbers, got {text!r}") from exc


def parse_path(text: str) -> list[list[float]]:
    return [parse_reals(p) for p in text.split(";") if p.strip()]


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise UsageError("grid needs lo <= hi and step > 0")
    count = int(round((hi - lo) / step)) + 1
    # rounding to the step's decimals keeps grid points like 0.01 k exact decimals
    decimals = max(0, -int(np.floor(np.log10(step))) + 2)
    return np.round(lo + step * np.arange(count), decimals)


def parse_params(text: str | None) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"parameter {item!r} must look like name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise UsageError(f"parameter {k.strip()!r} needs a number") from exc
    return out


def load_source(args) -> PIVP:
    """A PIVP from ``-e``, a PIVP JSON file or a circuit JSON file."""
    if getattr(args, "expr", None):
        base = parse_exact(args.base) if getattr(args, "base", None) else None
        return compile_expr(parse(args.expr), base)
    if not getattr(args, "source", None):
        raise UsageError("give a source file or an expression with -e")
    text = Path(args.source).read_text()
    doc = json.loads(text)
    if isinstance(doc, dict) and "units" in doc:
        c = circuit_from_json(doc)
        problems = circuit_validate(c)
        if problems:
            raise UsageError("invalid circuit: " + "; ".join(problems))
        return circuit_to_pivp(c, Path(args.source).stem)
    return pivp_from_json(doc)


def emit(args, text: str | None = None, payload=None):
    if args.json and payload is not None:
        print(json.dumps(payload))
    elif text is not None:
        print(text)


def write_out(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_compile(args) -> int:
    f = load_source(args)
    text = pivp_serialize(f)
    if args.out:
        write_out(args.out, text)
        emit(args, f"wrote {args.out}: n={f.state_dim} d={f.input_dim} l={f.output_dim}",
             {"out": args.out, "n": f.state_dim, "d": f.input_dim, "l": f.output_dim})
    else:
        write_out(None, text)
    return 0


def cmd_eval(args) -> int:
    f = load_source(args)
    if args.at is None:
        raise UsageError("eval needs --at")
    x = parse_reals(args.at)
    path = parse_path(args.path) if args.path else None
    y = evaluate(f, x, args.tol, path)
    values = [float(v) for v in y]
    emit(args, ",".join(repr(v) for v in values), {"at": x, "values": values})
    return 0


def cmd_simulate(args) -> int:
    f = load_source(args)
    if args.t1 is None:
        raise UsageError("simulate needs --t1")
    traj = integrate(f, float(args.t1), args.tol,
                     t0=None if args.t0 is None else float(args.t0))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            traj.to_csv(fh, dense=args.dense)
    elif not args.json:
        sys.stdout.write(traj.to_csv(dense=args.dense))
    final = [float(v) for v in traj.final[: f.output_dim]]
    summary = {"t_end": traj.t_end, "steps": traj.steps, "final": final,
               "error_estimate": traj.error_estimate}
    if args.out or args.json:
        emit(args, f"{traj.steps} steps to t={traj.t_end!r}; outputs "
             + ",".join(repr(v) for v in final), summary)
    return 0


def cmd_circuit(args) -> int:
    if args.from_pivp:
        f = pivp_deserialize(Path(args.from_pivp).read_text())
        c = pivp_to_circuit(f)
        write_out(args.out, circuit_serialize(c))
        return 0
    if not args.source:
        raise UsageError("circuit needs a circuit file (or --from-pivp)")
    c = circuit_deserialize(Path(args.source).read_text())
    problems = circuit_validate(c)
    if problems:
        emit(args, "invalid circuit:\n  " + "\n  ".join(problems),
             {"valid": False, "problems": problems})
        return 1
    f = circuit_to_pivp(c, Path(args.source).stem)
    if args.to_pivp:
        write_out(args.to_pivp, pivp_serialize(f))
    counts = c.counts()
    emit(args, f"valid circuit: {counts}; compiled to n={f.state_dim} d={f.input_dim} "
         f"l={f.output_dim}" + (f"; wrote {args.to_pivp}" if args.to_pivp else ""),
         {"valid": True, "counts": counts, "n": f.state_dim, "d": f.input_dim,
          "l": f.output_dim})
    return 0


def cmd_zoo(args) -> int:
    if args.name == "list":
        for name, zf in zoo.ZOO.items():
            params = ", ".join(f"{k}={v:g}" for k, v in zf.defaults)
            print(f"{name}({zf.variable}; {params}): {zf.description}"
                  + (f" [{zf.constraints}]" if zf.constraints else ""))
        return 0
    if args.name not in zoo.ZOO:
        raise UsageError(f"unknown zoo function {args.name!r}; try 'zoo list'")
    zf = zoo.ZOO[args.name]
    grid = parse_grid(args.grid)
    given = parse_params(args.params)
    p = zf.params(given)
    ref, bound, ok = zf.check(grid, given)
    comp = np.full(grid.shape, np.nan)
    if args.compiled:
        comp = zf.compiled(grid, given, args.tol)
    names = list(p)
    rows = [[zf.variable] + names + ["reference", "compiled", "bound", "pass"]]
    for i, v in enumerate(grid):
        rows.append([repr(float(v))] + [repr(p[k]) for k in names]
                    + [repr(float(ref[i])), "" if np.isnan(comp[i]) else repr(float(comp[i])),
                       "" if np.isnan(bound[i]) else repr(float(bound[i])),
                       "pass" if ok[i] else "fail"])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    elif not args.json:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    violations = int(np.count_nonzero(~ok))
    summary = {"function": zf.name, "points": int(grid.size), "violations": violations}
    if args.compiled:
        summary["max_compiled_difference"] = float(np.nanmax(np.abs(comp - ref)))
    if args.json:
        print(json.dumps(summary))
    elif args.check or args.out:
        print(f"{zf.name}: {grid.size} points, {violations} violations"
              + (f", max |compiled - reference| = {summary['max_compiled_difference']:.3g}"
                 if args.compiled else ""), file=sys.stderr)
    return 1 if args.check and violations else 0


def cmd_check_bound(args) -> int:
    f = load_source(args)
    grid = parse_grid(args.grid)
    report = check_bound(f, float(grid[0]), float(grid[-1]), args.tol, samples=len(grid))
    emit(args, report.summary(),
         {"ok": report.ok, "max_ratio": report.max_ratio, "worst_x": list(report.worst_x),
          "exceedances": [[list(x), r] for x, r in report.exceedances]})
    return 0 if report.ok else 1


def cmd_explain(args) -> int:
    f = load_source(args)
    problems = pivp_validate(f)
    lines = [f.describe(), ""]
    lines.append(f"polynomially bounded: {f.is_poly}")
    lines.append(f"approximate initial values: {f.is_approximate}")
    lines.append("validation: " + ("ok" if not problems else "; ".join(problems)))
    if f.trace is not None:
        lines += ["", "construction:", f.trace.render()]
    emit(args, "\n".join(lines),
         {"name": f.name, "n": f.state_dim, "d": f.input_dim, "l": f.output_dim,
          "poly_bounded": f.is_poly, "approximate": f.is_approximate, "problems": problems,
          "trace": f.trace.to_json() if f.trace is not None else None})
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output and errors")
    common.add_argument("--tol", type=float, default=1e-10, help="integration tolerance")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("source", nargs="?", help="PIVP JSON or circuit JSON file")
    source.add_argument("-e", "--expr", help="expression to compile instead of a file")
    source.add_argument("--base", help="base point for -e (comma-separated exact numbers)")

    p = argparse.ArgumentParser(prog="gpac", description="Compile, simulate and check "
                                "polynomial initial value problems and GPAC circuits.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile", parents=[common, source], help="compile to PIVP JSON")
    s.add_argument("-o", "--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("eval", parents=[common, source], help="evaluate at a point")
    s.add_argument("--at", help="input point, comma-separated")
    s.add_argument("--path", help="waypoints 'x,y;x,y;...' from the base point")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("simulate", parents=[common, source], help="integrate a one-input system")
    s.add_argument("--t0", help="start time (default: base point)")
    s.add_argument("--t1", help="end time")
    s.add_argument("--dense", type=int, help="write N equally spaced dense samples")
    s.add_argument("-o", "--out", help="trajectory CSV file (default stdout)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("circuit", parents=[common], help="validate or convert circuits")
    s.add_argument("source", nargs="?", help="circuit JSON file")
    s.add_argument("--to-pivp", help="write the compiled PIVP JSON here")
    s.add_argument("--from-pivp", help="build a circuit from this PIVP JSON file")
    s.add_argument("-o", "--out", help="output for --from-pivp (default stdout)")
    s.set_defaults(func=cmd_circuit)

    s = sub.add_parser("zoo", parents=[common], help="tabulate and check zoo functions")
    s.add_argument("name", help="zoo function name, or 'list'")
    s.add_argument("--params", help="parameters k=v,k=v (e.g. mu=5,lambda=4)")
    s.add_argument("--grid", default="-4:4:0.01", help="lo:hi:step for the sampled variable")
    s.add_argument("--check", action="store_true", help="exit 1 if any bound is violated")
    s.add_argument("--compiled", action="store_true", help="also evaluate the compiled system")
    s.add_argument("-o", "--out", help="CSV file (default stdout)")
    s.set_defaults(func=cmd_zoo)

    s = sub.add_parser("check-bound", parents=[common, source], help="sample the growth bound")
    s.add_argument("--grid", default="-4:4:0.02", help="lo:hi:step range of inputs")
    s.set_defaults(func=cmd_check_bound)

    s = sub.add_parser("explain", parents=[common, source], help="describe a system")
    s.set_defaults(func=cmd_explain)
    return p


def _join_values(argv: list[str]) -> list[str]:
    """Glue ``--flag -3:3:1`` into ``--flag=-3:3:1`` so negative values parse."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _join_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # reported, not raised, at the command line
        err = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ExprError):
            err.update(line=exc.line, column=exc.column, message=exc.message)
        if args.json:
            print(json.dumps({"error": err}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
