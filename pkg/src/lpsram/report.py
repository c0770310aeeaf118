"""Resistance sweeps, detection-table reproduction and CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from lpsram.array import Address
from lpsram.defects import (
    DEFAULT_PROFILE,
    Defect,
    DefectKind,
    TechnologyProfile,
    classify_defect,
    require_valid,
    validate_profile,
)
from lpsram.dsl import TestProgram, builtin
from lpsram.engine import DETECTED, NO_EFFECT, UNDETECTED, execute, table_cell, verdict_for_table

TABLE_ROWS, TABLE_COLS = 4, 4
TABLE_LOCATION = Address(1, 1)

CSV_HEADER = ["kind", "polarity", "resistance_ohms", "test", "verdict", "mechanisms", "cycles"]


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepRow:
    kind: Optional[str]
    polarity: Optional[int]
    resistance: float
    test: str
    verdict: str
    mechanisms: tuple[str, ...]
    cycles: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "polarity": self.polarity,
            "resistance_ohms": self.resistance,
            "test": self.test,
            "verdict": self.verdict,
            "mechanisms": list(self.mechanisms),
            "cycles": self.cycles,
        }


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}


def log_grid(lo: float, hi: float, points: int) -> list[float]:
    if not (0 < lo < hi) or points < 2:
        if points == 1 and lo > 0 and lo == hi:
            return [float(lo)]
        raise ValueError("grid needs 0 < lo < hi and at least two points")
    return [float(x) for x in np.geomspace(lo, hi, points)]


def _resolve_test(test: Union[str, TestProgram]) -> tuple[str, TestProgram]:
    if isinstance(test, TestProgram):
        return test.name, test
    return test, builtin(test)


def _sweep_point(args) -> SweepRow:
    kind, polarity, r, name, program, profile = args
    defects = [] if kind is None else [Defect(kind, polarity, r, TABLE_LOCATION)]
    result = execute(program, TABLE_ROWS, TABLE_COLS, defects, profile, keep_passing=False)
    return SweepRow(
        None if kind is None else kind.value,
        None if kind is None else polarity,
        r,
        name,
        verdict_for_table(name, result),
        tuple(sorted(result.mechanisms)),
        result.cost.cycles,
    )


def sweep(kind: Optional[DefectKind], polarity: int, grid: Sequence[float],
          tests: Iterable[Union[str, TestProgram]],
          profile: TechnologyProfile = DEFAULT_PROFILE, jobs: int = 1) -> SweepReport:
    """Run every test at every resistance on a 4x4 array with the defect at (1,1).

    ``kind=None`` sweeps a fault-free array. Rows come out resistance-major in
    grid order whatever ``jobs`` is.
    """
    grid = list(grid)
    if any(r <= 0 for r in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be positive and strictly increasing")
    resolved = [_resolve_test(t) for t in tests]
    work = [(kind, polarity, r, name, prog, profile) for r in grid for name, prog in resolved]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, work, chunksize=8))
    else:
        rows = [_sweep_point(w) for w in work]
    return SweepReport(rows)


# ---------------------------------------------------------------------------
# Detection tables


@dataclass(frozen=True)
class TablePoint:
    label: str
    resistance: float


@dataclass(frozen=True)
class TableDef:
    name: str
    kind: DefectKind
    polarity: int
    tests: tuple[tuple[str, str], ...]  # (row label, builtin name)
    points: tuple[TablePoint, ...]
    expected: dict[str, tuple[str, ...]]


_D, _U, _N = DETECTED, UNDETECTED, NO_EFFECT

# Points sit within a factor of two of each threshold on both sides, so
# doubling or halving any threshold moves at least one point across a range.
TABLES: tuple[TableDef, ...] = (
    TableDef(
        "I", DefectKind.R1, 0,
        (("LPR", "lpr"), ("March", "march_raw"), ("IDDQ", "iddq"), ("RES", "res")),
        (TablePoint("<R1'", 15e3),
         TablePoint("R1'-R1'' outside RES sub-range", 22e3),
         TablePoint("R1'-R1'' in RES sub-range", 30e3),
         TablePoint(">R1''", 50e3)),
        {"LPR": (_D, _D, _D, _N),
         "March": (_D, _U, _U, _N),
         "IDDQ": (_U, _D, _D, _N),
         "RES": (_U, _U, _D, _N)},
    ),
    TableDef(
        "II", DefectKind.R2, 0,
        (("LPR", "lpr"), ("March", "march_raw")),
        (TablePoint("<R2'", 2e6),
         TablePoint("R2'-R2'' low", 5e6),
         TablePoint("R2'-R2'' high", 10e6),
         TablePoint(">R2''", 20e6)),
        {"LPR": (_N, _U, _U, _D),
         "March": (_N, _D, _D, _D)},
    ),
    TableDef(
        "III", DefectKind.R3, 1,
        (("LPR", "lpr"), ("March", "march_raw")),
        (TablePoint("<R3'", 20e3), TablePoint(">R3'", 40e3)),
        {"LPR": (_N, _D),
         "March": (_N, _D)},
    ),
)


@dataclass
class TableResult:
    definition: TableDef
    actual: dict[str, tuple[str, ...]]

    @property
    def match(self) -> bool:
        return self.actual == self.definition.expected

    def mismatches(self) -> list[tuple[str, str]]:
        d = self.definition
        return [(row, d.points[i].label)
                for row, cells in d.expected.items()
                for i, cell in enumerate(cells) if self.actual[row][i] != cell]

    def to_dict(self) -> dict:
        d = self.definition
        return {
            "table": d.name,
            "defect": d.kind.value,
            "polarity": d.polarity,
            "points": [{"label": p.label, "resistance_ohms": p.resistance} for p in d.points],
            "tests": [label for label, _ in d.tests],
            "expected": {k: list(v) for k, v in d.expected.items()},
            "actual": {k: list(v) for k, v in self.actual.items()},
            "match": self.match,
        }


@dataclass
class TableReport:
    tables: list[TableResult]
    profile_violations: list[str] = field(default_factory=list)

    @property
    def match(self) -> bool:
        return not self.profile_violations and all(t.match for t in self.tables)

    def to_dict(self) -> dict:
        return {
            "match": self.match,
            "profile_violations": self.profile_violations,
            "tables": [t.to_dict() for t in self.tables],
        }


def reproduce_tables(profile: TechnologyProfile = DEFAULT_PROFILE, *,
                     strict: bool = True) -> TableReport:
    """Recompute the detection matrices and compare them with the published grids.

    With ``strict=False`` an invalid profile is still simulated; the report
    then lists the violations and never counts as a match.
    """
    violations = validate_profile(profile)
    if strict:
        require_valid(profile)
    results = []
    for table in TABLES:
        actual = {}
        for label, test in table.tests:
            program = builtin(test)
            cells = []
            for point in table.points:
                defect = Defect(table.kind, table.polarity, point.resistance, TABLE_LOCATION)
                run = execute(program, TABLE_ROWS, TABLE_COLS, [defect], profile,
                              keep_passing=False)
                cells.append(table_cell(test, run, classify_defect(defect, profile)))
            actual[label] = tuple(cells)
        results.append(TableResult(table, actual))
    return TableReport(results, violations)


def render_tables(report: TableReport) -> str:
    """Plain-text grids; mismatching cells show ``actual (expected ...)``."""
    out = []
    for t in report.tables:
        d = t.definition
        out.append(f"Table {d.name}: defect {d.kind.value}, vulnerable value {d.polarity}"
                   f" -- {'match' if t.match else 'MISMATCH'}")
        header = ["test"] + [f"{p.label} [{_fmt_ohms(p.resistance)}]" for p in d.points]
        grid = [header]
        for label, _ in d.tests:
            row = [label]
            for got, want in zip(t.actual[label], d.expected[label]):
                row.append(got if got == want else f"{got} (expected {want})")
            grid.append(row)
        widths = [max(len(r[i]) for r in grid) for i in range(len(header))]
        for r in grid:
            out.append("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        out.append("")
    for v in report.profile_violations:
        out.append(f"profile violation: {v}")
    out.append(f"overall: {'match' if report.match else 'MISMATCH'}")
    return "\n".join(out) + "\n"


def _fmt_ohms(r: float) -> str:
    for scale, suffix in ((1e6, "M"), (1e3, "k")):
        if r >= scale:
            return f"{r / scale:g}{suffix}"
    return f"{r:g}"


# ---------------------------------------------------------------------------
# Emission


@contextmanager
def _open_sink(sink):
    if sink is None or sink == "-":
        yield sys.stdout
    elif isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield sink


def sweep_to_csv(report: SweepReport, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.rows:
        w.writerow([
            r.kind or "none",
            "" if r.polarity is None else r.polarity,
            repr(float(r.resistance)),
            r.test,
            r.verdict,
            ";".join(r.mechanisms),
            r.cycles,
        ])


def read_sweep_csv(fh: IO[str]) -> SweepReport:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected sweep CSV header {header!r}")
    rows = []
    for rec in reader:
        kind, pol, ohms, test, verdict, mechs, cycles = rec
        rows.append(SweepRow(
            None if kind == "none" else kind,
            None if pol == "" else int(pol),
            float(ohms),
            test,
            verdict,
            tuple(m for m in mechs.split(";") if m),
            int(cycles),
        ))
    return SweepReport(rows)


def tables_to_csv(report: TableReport, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["table", "test", "point", "resistance_ohms", "expected", "actual"])
    for t in report.tables:
        d = t.definition
        for label, _ in d.tests:
            for i, p in enumerate(d.points):
                w.writerow([d.name, label, p.label, repr(float(p.resistance)),
                            d.expected[label][i], t.actual[label][i]])


def emit(report: Union[SweepReport, TableReport], fmt: str = "csv", sink=None) -> None:
    """Write ``report`` as CSV or JSON to a path, an open file, or stdout."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    with _open_sink(sink) as fh:
        if fmt == "json":
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        elif isinstance(report, SweepReport):
            sweep_to_csv(report, fh)
        else:
            tables_to_csv(report, fh)


def csv_text(report: SweepReport) -> str:
    buf = io.StringIO()
    sweep_to_csv(report, buf)
    return buf.getvalue()
