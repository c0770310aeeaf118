"""Array/cell data model, address orders and power-mode bookkeeping."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Optional

from lpsram.errors import ConfigError

if TYPE_CHECKING:
    from lpsram.defects import BehaviorSet, TechnologyProfile

Bit = int
"""A stored logic level, 0 or 1."""

MaybeBit = Optional[int]
"""A bit, or ``None`` for a cell that has never been written."""


def complement(b: Bit) -> Bit:
    return 1 - b


class Address(NamedTuple):
    row: int
    col: int

    def __str__(self) -> str:
        return f"{self.row},{self.col}"


class AddressOrder(enum.Enum):
    ASCENDING = "^"
    DESCENDING = "v"
    ANY = "b"


class PowerMode(enum.Enum):
    NM = "NM"
    LPM = "LPM"


@dataclass
class CellState:
    """Per-cell state.

    ``just_written`` holds the last written value while no other event has
    touched the cell since. ``res_stress_count`` counts uninterrupted indirect
    reads while the cell holds its vulnerable value. ``cause`` names the
    mechanism that last drove the cell away from what was written; it is
    cleared by a write that takes effect.
    """

    stored: MaybeBit = None
    just_written: MaybeBit = None
    res_stress_count: int = 0
    post_lpm_pending: bool = False
    cause: str | None = None


@dataclass
class MemoryArray:
    rows: int
    cols: int
    profile: "TechnologyProfile"
    cells: list[list[CellState]] = field(init=False)
    shadow: list[list[MaybeBit]] = field(init=False)
    mode: PowerMode = PowerMode.NM
    defect_map: dict[Address, "BehaviorSet"] = field(default_factory=dict)
    # columns per row whose just_written is set; keeps row-wide clearing cheap
    pending_writes: list[set[int]] = field(init=False, repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"array dimensions must be positive, got {self.rows}x{self.cols}")
        self.cells = [[CellState() for _ in range(self.cols)] for _ in range(self.rows)]
        self.shadow = [[None] * self.cols for _ in range(self.rows)]
        self.pending_writes = [set() for _ in range(self.rows)]

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def cell(self, addr: Address) -> CellState:
        return self.cells[addr.row][addr.col]

    def contains(self, addr: Address) -> bool:
        return 0 <= addr.row < self.rows and 0 <= addr.col < self.cols

    def behaviors(self, addr: Address) -> "BehaviorSet | None":
        return self.defect_map.get(addr)

    def inject(self, addr: Address, behaviors: "BehaviorSet") -> None:
        """Attach a behavior set to one cell; at most one defect per cell."""
        addr = Address(*addr)
        if not self.contains(addr):
            raise ConfigError(f"defect address {addr} outside {self.rows}x{self.cols} array")
        if addr in self.defect_map:
            raise ConfigError(f"defect address collision at {addr}")
        self.defect_map[addr] = behaviors


def new_array(rows: int, cols: int, profile: "TechnologyProfile") -> MemoryArray:
    return MemoryArray(rows, cols, profile)


def address_sequence(order: AddressOrder, rows: int, cols: int) -> list[Address]:
    """Row-major addresses; ANY runs ascending so runs are reproducible."""
    seq = [Address(r, c) for r in range(rows) for c in range(cols)]
    if order is AddressOrder.DESCENDING:
        seq.reverse()
    return seq


def row_mates(addr: Address, cols: int) -> list[Address]:
    return [Address(addr.row, c) for c in range(cols) if c != addr.col]
