"""Command-line front end.

Exit status: 0 on success (and matching tables), 1 when a detection table
does not match, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from lpsram.array import Address
from lpsram.defects import (
    DEFAULT_PROFILE,
    Defect,
    DefectKind,
    TechnologyProfile,
    canonicalize,
    require_valid,
)
from lpsram.dsl import BUILTIN_NAMES, BUILTIN_SOURCES, TestProgram, builtin, format_program, load_program
from lpsram.engine import execute
from lpsram.errors import ConfigError, ParseError, SequencingError
from lpsram.report import emit, log_grid, render_tables, reproduce_tables, sweep

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

_SUFFIX = {"": 1.0, "k": 1e3, "m": 1e6, "g": 1e9}


class UsageError(Exception):
    pass


def parse_ohms(text: str) -> float:
    """``30000``, ``30k``, ``3e6``, ``5M`` (case-insensitive suffix, optional 'ohm')."""
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?\d+)?)\s*([kKmMgG]?)\s*(?:ohms?|Ω)?\s*", text)
    if not m:
        raise UsageError(f"bad resistance {text!r}")
    value = float(m.group(1)) * _SUFFIX[m.group(2).lower()]
    if value <= 0:
        raise UsageError(f"resistance must be positive, got {text!r}")
    return value


def _kind_polarity(label: str, pol: str) -> tuple[DefectKind, int]:
    try:
        kind, canonical = canonicalize(label)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    if pol not in ("0", "1"):
        raise UsageError(f"polarity must be 0 or 1, got {pol!r}")
    polarity = int(pol)
    if label.strip().upper() not in ("R1", "R2", "R3") and polarity != canonical:
        raise UsageError(f"{label} acts on stored value {canonical}; polarity {polarity} "
                         f"is the mirrored defect, use {kind.value}:{polarity}")
    return kind, polarity


def parse_defect(spec: str) -> Defect:
    """``KIND:POL:OHMS:ROW,COL``, e.g. ``R1:0:30k:1,1``."""
    parts = spec.split(":")
    if len(parts) != 4:
        raise UsageError(f"defect {spec!r} is not KIND:POL:OHMS:ROW,COL")
    kind, polarity = _kind_polarity(parts[0], parts[1])
    ohms = parse_ohms(parts[2])
    m = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*", parts[3])
    if not m:
        raise UsageError(f"bad defect location {parts[3]!r}")
    return Defect(kind, polarity, ohms, Address(int(m.group(1)), int(m.group(2))))


def load_test(ref: str) -> TestProgram:
    if ref in BUILTIN_SOURCES:
        return builtin(ref)
    path = Path(ref)
    if path.is_file():
        return load_program(path)
    raise UsageError(f"unknown test {ref!r}: not a builtin ({', '.join(BUILTIN_NAMES)}) "
                     "and not a readable file")


def load_profile(path: str | None) -> TechnologyProfile:
    if path is None:
        return DEFAULT_PROFILE
    try:
        return TechnologyProfile.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read profile {path}: {exc.strerror}") from None
    except TypeError as exc:
        raise UsageError(f"bad profile {path}: {exc}") from None


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args) -> int:
    program = load_test(args.test)
    profile = require_valid(load_profile(args.profile))
    defects = [parse_defect(d) for d in args.defect or []]
    result = execute(program, args.rows, args.cols, defects, profile,
                     keep_passing=not args.failures_only)
    if args.json:
        json.dump(result.to_dict(failures_only=args.failures_only), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(f"test: {program.name} ({format_program(program)})")
        print(f"array: {args.rows}x{args.cols}, defects: {len(defects)}")
        print(f"verdict: {result.verdict}")
        if result.mechanisms:
            print(f"mechanisms: {', '.join(sorted(result.mechanisms))}")
        print(f"cycles: {result.cost.cycles} (ops {result.cost.op_count}, "
              f"lpm {result.cost.lpm_dwells}, iddq {result.cost.iddq_measures})")
        print(f"observations: {result.observation_count}, failing: {len(result.failures)}")
        for o in result.failures[:args.show]:
            where = "array" if o.addr is None else f"({o.addr})"
            print(f"  cycle {o.cycle} {o.phase} {where}: expected {o.expected}, "
                  f"got {o.got} [{o.mechanism}]")
        for w in result.warnings:
            print(f"warning [{w.code}]: {w.message}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    profile = require_valid(load_profile(args.profile))
    if args.defect:
        parts = args.defect.split(":")
        if len(parts) != 2:
            raise UsageError(f"sweep defect {args.defect!r} is not KIND:POL")
        kind, polarity = _kind_polarity(*parts)
    else:
        kind, polarity = None, 0
    lo, hi, points = _parse_grid(args.grid)
    tests = [load_test(t.strip()) for t in args.tests.split(",") if t.strip()]
    if not tests:
        raise UsageError("no tests given")
    report = sweep(kind, polarity, log_grid(lo, hi, points), tests, profile, jobs=args.jobs)
    fmt = "json" if args.json else "csv"
    try:
        emit(report, fmt, args.csv or "-")
    except OSError as exc:
        raise UsageError(f"cannot write {args.csv}: {exc.strerror}") from None
    return EXIT_OK


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} is not LO:HI:POINTS")
    lo, hi = parse_ohms(parts[0]), parse_ohms(parts[1])
    try:
        points = int(parts[2])
    except ValueError:
        raise UsageError(f"bad point count {parts[2]!r}") from None
    if points < 2 or not lo < hi:
        raise UsageError("grid needs LO < HI and at least 2 points")
    return lo, hi, points


def cmd_tables(args) -> int:
    profile = load_profile(args.profile)
    report = reproduce_tables(profile, strict=False)
    if args.json:
        emit(report, "json", "-")
    else:
        sys.stdout.write(render_tables(report))
    if args.csv:
        try:
            emit(report, "csv", args.csv)
        except OSError as exc:
            raise UsageError(f"cannot write {args.csv}: {exc.strerror}") from None
    return EXIT_OK if report.match else EXIT_MISMATCH


def cmd_parse(args) -> int:
    try:
        program = load_program(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    print(format_program(program))
    return EXIT_OK


def cmd_list_tests(args) -> int:
    width = max(map(len, BUILTIN_NAMES))
    for name in BUILTIN_NAMES:
        print(f"{name.ljust(width)}  {BUILTIN_SOURCES[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lpsram",
        description="Simulate resistive defects in low-power SRAM and evaluate test methods.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one test program on an array")
    p.add_argument("--test", required=True, help="builtin name or .march file")
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--cols", type=int, default=4)
    p.add_argument("--defect", action="append", metavar="KIND:POL:OHMS:ROW,COL",
                   help="inject a defect; repeatable")
    p.add_argument("--profile", metavar="FILE", help="technology profile JSON")
    p.add_argument("--json", action="store_true", help="print the full RunResult as JSON")
    p.add_argument("--failures-only", action="store_true",
                   help="keep only failing observations")
    p.add_argument("--show", type=int, default=10, help="failing observations to list (text mode)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one defect over a log-spaced resistance grid")
    p.add_argument("--defect", metavar="KIND:POL", help="defect kind and polarity; omit for fault-free")
    p.add_argument("--grid", required=True, metavar="LO:HI:POINTS")
    p.add_argument("--tests", required=True, help="comma-separated builtin names or files")
    p.add_argument("--profile", metavar="FILE")
    p.add_argument("--csv", metavar="FILE", help="write CSV here instead of stdout")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", help="reproduce the detection tables and compare")
    p.add_argument("--profile", metavar="FILE")
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv", metavar="FILE", help="also write the cell grid as CSV")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("parse", help="parse a .march file and print its canonical form")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("list-tests", help="list builtin test programs")
    p.set_defaults(func=cmd_list_tests)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ParseError, SequencingError) as exc:
        print(f"lpsram {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
