"""Execute test programs against arrays with injected defects."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from lpsram import faults
from lpsram.array import Address, MemoryArray, PowerMode, address_sequence
from lpsram.defects import (
    DEFAULT_PROFILE,
    BehaviorSet,
    Defect,
    TechnologyProfile,
    classify_defect,
)
from lpsram.dsl import (
    CostEstimate,
    Iddq,
    Lpm,
    MarchElement,
    Nm,
    Res,
    TestProgram,
    check_program,
)
from lpsram.errors import SequencingError

DETECTED = "Detected"
UNDETECTED = "Undetected"
NO_EFFECT = "No Effect"

UNATTRIBUTED = "Unattributed"
IDDQ_OVER = "IddqOver"


class ResOutcome(enum.Enum):
    RES_DETECTED = "ResDetected"
    RES_UNDETECTED = "ResUndetected"
    NON_RES_DETECTION = "NonResDetection"


@dataclass(frozen=True)
class Observation:
    cycle: int
    phase: str
    addr: Optional[Address]
    kind: str  # "read-check" or "iddq-check"
    expected: Union[int, float, None]  # bit, current threshold, or None when unconstrained
    got: Union[int, float]
    passed: bool
    mechanism: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "phase": self.phase,
            "addr": None if self.addr is None else list(self.addr),
            "kind": self.kind,
            "expected": self.expected,
            "got": self.got,
            "pass": self.passed,
            "mechanism": self.mechanism,
        }


@dataclass(frozen=True)
class RunWarning:
    code: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


# warning codes; the last two describe the run configuration rather than a read
UNKNOWN_READ = "unknown-read"
EXPECTATION_MISMATCH = "expectation-mismatch"
MARCH_PRESSURE = "march-pressure"
RES_DEGENERATE = "res-degenerate"
CONFIG_WARNINGS = frozenset({MARCH_PRESSURE, RES_DEGENERATE})


@dataclass
class RunResult:
    program: str
    rows: int
    cols: int
    observations: list[Observation] = field(default_factory=list)
    failures: list[Observation] = field(default_factory=list)
    observation_count: int = 0
    mechanisms: set[str] = field(default_factory=set)
    cost: Optional[CostEstimate] = None
    warnings: list[RunWarning] = field(default_factory=list)
    has_res: bool = False

    @property
    def verdict(self) -> str:
        return DETECTED if self.failures else UNDETECTED

    @property
    def run_warnings(self) -> list[RunWarning]:
        return [w for w in self.warnings if w.code not in CONFIG_WARNINGS]

    def to_dict(self, failures_only: bool = False) -> dict:
        obs = self.failures if failures_only else self.observations
        return {
            "program": self.program,
            "rows": self.rows,
            "cols": self.cols,
            "verdict": self.verdict,
            "mechanisms": sorted(self.mechanisms),
            "cost": self.cost.to_dict() if self.cost else None,
            "observation_count": self.observation_count,
            "failure_count": len(self.failures),
            "observations": [o.to_dict() for o in obs],
            "warnings": [w.to_dict() for w in self.warnings],
        }


class _Runner:
    def __init__(self, program: TestProgram, array: MemoryArray, keep_passing: bool):
        self.program = program
        self.array = array
        self.profile = array.profile
        self.keep_passing = keep_passing
        self.result = RunResult(program.name, array.rows, array.cols, has_res=program.has_res)
        self.cycle = 0
        self.ops = self.lpm_dwells = self.iddq_measures = 0
        self._warned: set[tuple[str, str]] = set()

    def warn(self, code: str, message: str, once_key: str = "") -> None:
        key = (code, once_key or message)
        if key in self._warned:
            return
        self._warned.add(key)
        self.result.warnings.append(RunWarning(code, message))

    def record(self, obs: Observation) -> None:
        res = self.result
        res.observation_count += 1
        if not obs.passed:
            res.failures.append(obs)
            res.mechanisms.add(obs.mechanism or UNATTRIBUTED)
        if self.keep_passing or not obs.passed:
            res.observations.append(obs)

    # -- memory operations ------------------------------------------------

    def do_write(self, addr: Address, v: int) -> None:
        faults.write(self.array, addr, v)
        self.cycle += 1
        self.ops += 1

    def do_read(self, addr: Address, phase: str, want: Optional[int] = None) -> bool:
        """Direct read checked against ``want`` or, for plain reads, the shadow."""
        arr = self.array
        row, col = addr
        cell = arr.cells[row][col]
        shadow = arr.shadow[row][col]
        if cell.stored is None:
            self.warn(UNKNOWN_READ, f"read of never-written cell {addr} returned 0",
                      once_key=str(addr))
        expected = shadow
        if want is not None:
            if shadow is not None and want != shadow:
                self.warn(EXPECTATION_MISMATCH,
                          f"{phase}: r{want} at {addr} contradicts fault-free value {shadow}")
            else:
                expected = want
        got = faults.read(arr, addr)
        self.cycle += 1
        self.ops += 1
        passed = expected is None or got == expected
        if passed and not self.keep_passing:
            self.result.observation_count += 1
            return True
        mech = None if passed else (cell.cause or UNATTRIBUTED)
        self.record(Observation(self.cycle, phase, addr, "read-check", expected, got, passed, mech))
        return passed

    # -- items ------------------------------------------------------------

    def run(self) -> RunResult:
        for idx, item in enumerate(self.program.items):
            if isinstance(item, MarchElement):
                self.element(idx, item)
            elif isinstance(item, Lpm):
                faults.on_lpm_enter(self.array)
                self.cycle += self.profile.t_lpm
                self.lpm_dwells += 1
            elif isinstance(item, Nm):
                faults.on_lpm_exit(self.array)
            elif isinstance(item, Iddq):
                self.iddq(idx)
            elif isinstance(item, Res):
                self.res(idx, item.n)
        self.result.cost = CostEstimate(
            self.ops, self.lpm_dwells, self.iddq_measures,
            self.ops + self.lpm_dwells * self.profile.t_lpm
            + self.iddq_measures * self.profile.t_iddq,
        )
        return self.result

    def _require_nm(self, idx: int, what: str) -> None:
        if self.array.mode is not PowerMode.NM:
            raise SequencingError(f"item {idx}: {what} issued in low-power mode")

    def element(self, idx: int, el: MarchElement) -> None:
        self._require_nm(idx, "March element")
        phase = f"{idx}:march"
        for addr in address_sequence(el.order, self.array.rows, self.array.cols):
            for op in el.ops:
                if op[0] == "w":
                    self.do_write(addr, int(op[1]))
                else:
                    self.do_read(addr, phase, int(op[1]) if len(op) == 2 else None)

    def iddq(self, idx: int) -> None:
        self._require_nm(idx, "IDDQ measurement")
        current = faults.iddq_current(self.array, self.profile)
        threshold = self.profile.iddq_threshold(self.array.size)
        self.cycle += self.profile.t_iddq
        self.iddq_measures += 1
        passed = current <= threshold
        self.record(Observation(self.cycle, f"{idx}:iddq", None, "iddq-check", threshold,
                                current, passed, None if passed else IDDQ_OVER))

    def res(self, idx: int, n: int) -> None:
        """Read-equivalent stress, one victim cell at a time."""
        self._require_nm(idx, "res")
        rows, cols = self.array.rows, self.array.cols
        if cols == 1:
            self.warn(RES_DEGENERATE,
                      "res on a single-column array has no row-mates to stress; "
                      "only pre/post victim reads are applied")
        for r in range(rows):
            for j in range(cols):
                victim = Address(r, j)
                self.do_read(victim, f"{idx}:res-pre")
                others = [Address(r, c) for c in range(cols) if c != j]
                if others:
                    for t in range(n):
                        self.do_read(others[t % len(others)], f"{idx}:res-stress")
                self.do_read(victim, f"{idx}:res-post")


def build_array(rows: int, cols: int, defects: Iterable[Defect],
                profile: TechnologyProfile) -> MemoryArray:
    array = MemoryArray(rows, cols, profile)
    for d in defects:
        array.inject(d.location, classify_defect(d, profile))
    return array


def _march_pressure(program: TestProgram, cols: int) -> int:
    reads = max((el.reads for el in program.elements), default=0)
    return (cols - 1) * reads


def execute(program: TestProgram, rows: int, cols: int, defects: Iterable[Defect] = (),
            profile: TechnologyProfile = DEFAULT_PROFILE, *,
            keep_passing: bool = True) -> RunResult:
    """Run ``program`` on a fresh ``rows`` x ``cols`` array with ``defects`` injected.

    With ``keep_passing=False`` only failing observations are retained, which
    keeps memory flat on large arrays; counts are unaffected.
    """
    check_program(program.items)
    array = build_array(rows, cols, defects, profile)
    return run_on(program, array, keep_passing=keep_passing)


def run_on(program: TestProgram, array: MemoryArray, *, keep_passing: bool = True) -> RunResult:
    """Run ``program`` on an already-populated array."""
    runner = _Runner(program, array, keep_passing)
    pressure = _march_pressure(program, array.cols)
    if pressure >= array.profile.res_k:
        runner.warn(MARCH_PRESSURE,
                    f"(cols-1) x reads per element = {pressure} >= res_k = {array.profile.res_k}; "
                    "March elements alone may trigger stress flips")
    return runner.run()


def res_verdict(result: RunResult) -> ResOutcome:
    """Whether a failure is attributable to stress rather than a trivially broken cell."""
    if not result.has_res:
        raise ValueError("res_verdict needs a result from a program with a res command")
    if not result.failures:
        return ResOutcome.RES_UNDETECTED
    failed = {(o.phase.split(":")[0], o.addr) for o in result.failures
              if o.phase.endswith("res-pre")}
    for o in result.failures:
        if o.phase.endswith("res-post") and (o.phase.split(":")[0], o.addr) not in failed:
            return ResOutcome.RES_DETECTED
    return ResOutcome.NON_RES_DETECTION


def verdict_for_table(test_name: str, result: RunResult) -> str:
    if test_name == "res":
        return DETECTED if res_verdict(result) is ResOutcome.RES_DETECTED else UNDETECTED
    return result.verdict


def table_cell(test_name: str, result: RunResult, behaviors: BehaviorSet) -> str:
    """Verdict in table vocabulary: a defect without behaviors has no effect."""
    verdict = verdict_for_table(test_name, result)
    if verdict == UNDETECTED and len(behaviors) == 0:
        return NO_EFFECT
    return verdict

