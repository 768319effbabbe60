"""Command-line front end.

Exit codes: 0 success, 2 parse or usage error, 3 an undecided zero test on a
path that decides the classification.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import corpus
from .parser import ParseError, ProblemFile, parse_problem

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNDECIDED = 3

DEFAULT_DEGREE = 3
DEFAULT_TOL = 1e-10
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _read(where: str) -> tuple[str, str]:
    """Problem text for a path, ``-`` (stdin) or ``corpus:NAME``."""
    if where == "-":
        return "<stdin>", sys.stdin.read()
    if where.startswith("corpus:"):
        name = where.split(":", 1)[1]
        if name not in corpus.available():
            raise UsageError(f"unknown corpus entry {name!r} (available: {', '.join(corpus.available())})")
        return where, corpus.text(name)
    try:
        with open(where, encoding="utf-8") as fh:
            return where, fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {where}: {err.strerror}") from None


def _load(where: str) -> tuple[str, ProblemFile]:
    label, text = _read(where)
    try:
        problem = parse_problem(text)
        problem.require_single()
    except ParseError as err:
        err.source = label
        raise
    return label, problem


def _settings(args, problem: ProblemFile) -> dict:
    opts = problem.options
    degree = args.degree if args.degree is not None else int(opts.get("ansatz_degree", DEFAULT_DEGREE))
    tol = args.tol if args.tol is not None else float(opts.get("tol", DEFAULT_TOL))
    seed = args.seed if args.seed is not None else int(opts.get("seed", DEFAULT_SEED))
    fmt = args.format or opts.get("format", "json")
    if fmt not in ("json", "text"):
        raise UsageError(f"unknown format {fmt!r}")
    return {"degree": degree, "tol": tol, "seed": seed, "format": fmt}


def _dump(rep, fmt: str) -> str:
    from .report import render_text

    if fmt == "text":
        return render_text(rep) + "\n"
    return json.dumps(rep, indent=2, ensure_ascii=False) + "\n"


def _analyze_one(where: str, degree, tol, seed, fmt):
    """Worker for batch mode; returns (report, status)."""
    from .report import analyze

    label, problem = _load(where)
    ns = argparse.Namespace(degree=degree, tol=tol, seed=seed, format=fmt)
    st = _settings(ns, problem)
    rep = analyze(problem, degree=st["degree"], tol=st["tol"], seed=st["seed"], source=label)
    return rep, st["format"]


def cmd_analyze(args) -> int:
    from .report import analyze

    if args.all:
        wheres = [f"corpus:{n}" for n in corpus.NAMES]
        jobs = [(s, args.degree, args.tol, args.seed, args.format) for s in wheres]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_analyze_one, *zip(*jobs)))
        else:
            results = [_analyze_one(*j) for j in jobs]
        reps = [r for r, _ in results]
        fmt = args.format or "json"
        sys.stdout.write(_dump(reps, fmt))
        _warn(w for r in reps for w in r["warnings"])
        return EXIT_UNDECIDED if any(r["status"] != "ok" for r in reps) else EXIT_OK
    if not args.file:
        raise UsageError("analyze needs a FILE or --all")
    label, problem = _load(args.file)
    st = _settings(args, problem)
    rep = analyze(problem, degree=st["degree"], tol=st["tol"], seed=st["seed"], source=label)
    sys.stdout.write(_dump(rep, st["format"]))
    _warn(rep["warnings"])
    if rep["status"] != "ok":
        print(f"error: {label}: a decisive zero test was undecided", file=sys.stderr)
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_symmetries(args) -> int:
    from . import kernel
    from .report import symmetries_section

    label, problem = _load(args.file)
    st = _settings(args, problem)
    with kernel.zero_tolerance(st["tol"]):
        sec = symmetries_section(problem, st["degree"], st["seed"])
    rep = {"input": {"name": problem.name, "source": label}, "symmetries": sec}
    sys.stdout.write(_dump(rep, st["format"]))
    return EXIT_OK


def cmd_geometry(args) -> int:
    from .linearize import plane_geometry

    label, problem = _load(args.file)
    if not any(t.target is not None and str(t.target) == "0" for t in problem.transforms):
        raise UsageError(f"{label}: geometry needs a declared transform with target U'' = 0")
    a1, a2, b1, b2 = (_fraction(c) for c in args.constants)
    try:
        planes = plane_geometry(a1, -a2, b1, b2)
    except ValueError as err:
        raise UsageError(str(err)) from None
    sys.stdout.write(planes.to_csv(extent=args.extent, n=args.n))
    return EXIT_OK


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"constant {text!r} is not a rational number") from None


def _warn(warnings) -> None:
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cxlin", description="Complex linearization of two-component ODE systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, with_format=True):
        sp_.add_argument("--degree", type=int, default=None, help="polynomial ansatz degree (default 3)")
        sp_.add_argument("--tol", type=float, default=None, help="zero-test tolerance (default 1e-10)")
        sp_.add_argument("--seed", type=int, default=None, help="seed for randomized zero tests (default 0)")
        if with_format:
            sp_.add_argument("--format", choices=("json", "text"), default=None)

    a = sub.add_parser("analyze", help="full pipeline report")
    a.add_argument("file", nargs="?", help="problem file, '-' for stdin, or corpus:NAME")
    a.add_argument("--all", action="store_true", help="analyze every corpus system")
    a.add_argument("--jobs", type=int, default=1, help="worker processes for --all")
    common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("symmetries", help="symmetry algebra only")
    s.add_argument("file")
    common(s)
    s.set_defaults(func=cmd_symmetries)

    g = sub.add_parser("geometry", help="plane-pair plot data as CSV")
    g.add_argument("file")
    g.add_argument("--constants", nargs=4, metavar=("A1", "A2", "B1", "B2"), default=["1", "0", "0", "0"])
    g.add_argument("--extent", type=float, default=1.0)
    g.add_argument("--n", type=int, default=11)
    g.set_defaults(func=cmd_geometry)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "degree", None) is not None and args.degree < 0:
        parser.error("--degree must be non-negative")
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {getattr(err, 'source', '<input>')}: {err}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
