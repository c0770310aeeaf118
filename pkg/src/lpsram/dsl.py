"""Test-program notation: parser, canonical printer, builtins and cost model.

Grammar::

    program := item (';' item)* [';']
    item    := element | command
    element := dir '(' op (',' op)* ')'
    dir     := '^' | 'v' | 'b' | '⇑' | '⇓' | '⇕'
    op      := 'w0' | 'w1' | 'r0' | 'r1' | 'r'
    command := 'lpm' | 'nm' | 'iddq' | 'res' '(' int ')'

Whitespace and ``#`` comments are ignored; keywords are case-insensitive.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from lpsram.array import AddressOrder
from lpsram.defects import DEFAULT_PROFILE, TechnologyProfile
from lpsram.errors import ParseError

OPS = ("w0", "w1", "r0", "r1", "r")

_DIRECTIONS = {
    "^": AddressOrder.ASCENDING,
    "⇑": AddressOrder.ASCENDING,
    "v": AddressOrder.DESCENDING,
    "⇓": AddressOrder.DESCENDING,
    "b": AddressOrder.ANY,
    "⇕": AddressOrder.ANY,
}


@dataclass(frozen=True)
class MarchElement:
    order: AddressOrder
    ops: tuple[str, ...]

    def __post_init__(self):
        if not self.ops:
            raise ValueError("a March element needs at least one operation")
        bad = [op for op in self.ops if op not in OPS]
        if bad:
            raise ValueError(f"unknown March operation(s) {bad}")

    @property
    def reads(self) -> int:
        return sum(op.startswith("r") for op in self.ops)


@dataclass(frozen=True)
class Lpm:
    pass


@dataclass(frozen=True)
class Nm:
    pass


@dataclass(frozen=True)
class Iddq:
    pass


@dataclass(frozen=True)
class Res:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("res(n) needs n >= 1")


Item = Union[MarchElement, Lpm, Nm, Iddq, Res]


@dataclass(frozen=True)
class TestProgram:
    items: tuple[Item, ...]
    name: str = field(default="<text>", compare=False)

    __test__ = False  # keep pytest from collecting this class

    @property
    def elements(self) -> list[MarchElement]:
        return [it for it in self.items if isinstance(it, MarchElement)]

    @property
    def has_res(self) -> bool:
        return any(isinstance(it, Res) for it in self.items)


@dataclass(frozen=True)
class CostEstimate:
    op_count: int
    lpm_dwells: int
    iddq_measures: int
    cycles: int

    def to_dict(self) -> dict:
        return {"cycles": self.cycles, "op_count": self.op_count,
                "lpm_dwells": self.lpm_dwells, "iddq_measures": self.iddq_measures}


# ---------------------------------------------------------------------------
# Lexer / parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<word>[A-Za-z][A-Za-z0-9]*)
  | (?P<punct>[;(),^⇑⇓⇕])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line=line, column=pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, what: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"expected {what}, found {found}", line=tok.line, column=tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if tok.text != text:
            raise self.error(repr(text))
        self.i += 1
        return tok

    def program(self) -> list[tuple[Item, _Tok]]:
        items = [self.item()]
        while self.tok.text == ";":
            self.i += 1
            if self.tok.kind == "eof":
                break
            items.append(self.item())
        if self.tok.kind != "eof":
            raise self.error("';' or end of input")
        return items

    def item(self) -> tuple[Item, _Tok]:
        tok = self.tok
        word = tok.text.lower()
        if tok.text in _DIRECTIONS or word in ("v", "b"):
            self.i += 1
            return self.element(_DIRECTIONS[word]), tok
        if tok.kind == "word" and word in ("lpm", "nm", "iddq"):
            self.i += 1
            return {"lpm": Lpm(), "nm": Nm(), "iddq": Iddq()}[word], tok
        if tok.kind == "word" and word == "res":
            self.i += 1
            self.expect("(")
            num = self.tok
            if num.kind != "int":
                raise self.error("a positive integer")
            n = int(num.text)
            if n < 1:
                raise ParseError("res count must be at least 1", line=num.line, column=num.col)
            self.i += 1
            self.expect(")")
            return Res(n), tok
        raise self.error("a March element or command")

    def element(self, order: AddressOrder) -> MarchElement:
        self.expect("(")
        ops = [self.op()]
        while self.tok.text == ",":
            self.i += 1
            ops.append(self.op())
        self.expect(")")
        return MarchElement(order, tuple(ops))

    def op(self) -> str:
        tok = self.tok
        if tok.kind == "word" and tok.text.lower() in OPS:
            self.i += 1
            return tok.text.lower()
        raise self.error("a March operation (w0, w1, r0, r1, r)")


def check_program(items) -> None:
    """Enforce power-mode sequencing: lpm/nm alternate from NM, nothing runs in LPM."""
    in_lpm = False
    for idx, it in enumerate(items):
        if isinstance(it, Lpm):
            if in_lpm:
                raise ParseError("lpm while already in low-power mode", item=idx)
            in_lpm = True
        elif isinstance(it, Nm):
            if not in_lpm:
                raise ParseError("nm without a preceding lpm", item=idx)
            in_lpm = False
        elif in_lpm:
            what = "March element" if isinstance(it, MarchElement) else format_item(it)
            raise ParseError(f"{what} not allowed in low-power mode", item=idx)


def parse_program(text: str, name: str = "<text>") -> TestProgram:
    parsed = _Parser(text).program()
    items = tuple(it for it, _ in parsed)
    check_program(items)
    return TestProgram(items, name=name)


def load_program(path: str | Path) -> TestProgram:
    path = Path(path)
    return parse_program(path.read_text(encoding="utf-8"), name=path.stem)


# ---------------------------------------------------------------------------
# Printer

_ORDER_SYMBOL = {
    AddressOrder.ASCENDING: "^",
    AddressOrder.DESCENDING: "v",
    AddressOrder.ANY: "b",
}


def format_item(it: Item) -> str:
    if isinstance(it, MarchElement):
        return f"{_ORDER_SYMBOL[it.order]}({','.join(it.ops)})"
    if isinstance(it, Res):
        return f"res({it.n})"
    return type(it).__name__.lower()


def format_program(program: TestProgram) -> str:
    return "; ".join(format_item(it) for it in program.items)


# ---------------------------------------------------------------------------
# Builtins

BUILTIN_SOURCES = {
    "march_basic": "^(w0); ^(r0,w1); v(r1,w0); b(r0)",
    "march_raw": "^(w0); ^(r0,w0,r0); ^(r0,w1,r1); ^(r1,w1,r1); ^(r1,w0,r0); b(r0)",
    "lpr": "^(w0); lpm; nm; ^(r0); ^(w1); lpm; nm; ^(r1)",
    "iddq": "^(w0); iddq; ^(w1); iddq",
    "res": "^(w0); res(96); ^(r0); ^(w1); res(96); ^(r1)",
}

BUILTIN_NAMES = tuple(BUILTIN_SOURCES)


def builtin(name: str) -> TestProgram:
    try:
        src = BUILTIN_SOURCES[name]
    except KeyError:
        raise KeyError(f"unknown builtin test {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return parse_program(src, name=name)


# ---------------------------------------------------------------------------
# Cost model


def cost_estimate(program: TestProgram, rows: int, cols: int,
                  profile: TechnologyProfile = DEFAULT_PROFILE) -> CostEstimate:
    """One cycle per memory operation plus fixed LPM-dwell and IDDQ penalties."""
    cells = rows * cols
    ops = lpm = iddq = 0
    for it in program.items:
        if isinstance(it, MarchElement):
            ops += len(it.ops) * cells
        elif isinstance(it, Res):
            ops += cells * (it.n + 2)
        elif isinstance(it, Lpm):
            lpm += 1
        elif isinstance(it, Iddq):
            iddq += 1
    return CostEstimate(ops, lpm, iddq, ops + lpm * profile.t_lpm + iddq * profile.t_iddq)
