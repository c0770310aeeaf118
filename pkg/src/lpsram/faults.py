"""How a cell with a given behavior set responds to memory events.

Cell-level handlers (``on_write``, ``on_read``, ``on_indirect_read``) act on a
single :class:`CellState`. Array-level helpers (``write``, ``read``,
``on_lpm_enter``, ``on_lpm_exit``, ``iddq_current``) sequence those handlers
and keep the shadow array and row bookkeeping up to date.
"""
from __future__ import annotations

from lpsram.array import Address, Bit, CellState, MemoryArray, PowerMode, complement
from lpsram.defects import (
    FAULT_FREE,
    BehaviorSet,
    IddqLeak,
    LpmExitFlip,
    PostLpmReadFlip,
    RawFlip,
    ResFlip,
    StuckAt,
    TechnologyProfile,
    TransitionFault,
)
from lpsram.errors import SequencingError

# mechanism labels attached to cells whose content departs from what was written
STUCK_LIKE = "StuckLike"
TRANSITION_FAIL = "TransitionFailLike"
RAW_FAIL = "RawFail"
POST_LPM_FAIL = "PostLpmFail"
STRESS_FLIP = "StressFlip"


def on_write(cell: CellState, behaviors: BehaviorSet, v: Bit) -> None:
    stuck = behaviors.get(StuckAt)
    tf = behaviors.get(TransitionFault)
    if stuck is not None:
        cell.stored = stuck.value
        cell.cause = STUCK_LIKE if v != stuck.value else None
    elif tf is not None and v == tf.to and cell.stored != v:
        # a never-written cell is treated as holding the opposite value
        cell.stored = complement(v)
        cell.cause = TRANSITION_FAIL
    else:
        cell.stored = v
        cell.cause = None
    cell.just_written = v
    cell.res_stress_count = 0
    cell.post_lpm_pending = False


def on_read(cell: CellState, behaviors: BehaviorSet) -> Bit:
    """Direct read; a never-written cell reads as 0 (callers flag that)."""
    if not behaviors:
        value = 0 if cell.stored is None else cell.stored
        cell.just_written = None
        cell.res_stress_count = 0
        cell.post_lpm_pending = False
        return value
    stuck = behaviors.get(StuckAt)
    post = behaviors.get(PostLpmReadFlip)
    raw = behaviors.get(RawFlip)
    if stuck is not None:
        value = stuck.value
    elif post is not None and cell.post_lpm_pending and cell.stored == post.vulnerable:
        value = cell.stored = complement(post.vulnerable)
        cell.cause = POST_LPM_FAIL
    elif raw is not None and cell.just_written == raw.vulnerable:
        value = cell.stored = complement(raw.vulnerable)
        cell.cause = RAW_FAIL
    else:
        value = 0 if cell.stored is None else cell.stored
    cell.just_written = None
    cell.res_stress_count = 0
    cell.post_lpm_pending = False
    return value


def on_indirect_read(cell: CellState, behaviors: BehaviorSet) -> None:
    """Stress from a direct read of a row-mate on the shared word line."""
    cell.just_written = None
    res = behaviors.get(ResFlip)
    if res is not None and cell.stored == res.vulnerable:
        cell.res_stress_count += 1
        if cell.res_stress_count >= res.k:
            cell.stored = complement(res.vulnerable)
            cell.res_stress_count = 0
            cell.cause = STRESS_FLIP


# ---------------------------------------------------------------------------
# Array-level sequencing


def _require_nm(array: MemoryArray, what: str) -> None:
    if array.mode is not PowerMode.NM:
        raise SequencingError(f"{what} is not possible in low-power mode")


def write(array: MemoryArray, addr: Address, v: Bit) -> None:
    """Direct write of one cell; updates the fault-free shadow too."""
    _require_nm(array, "write")
    row, col = addr
    on_write(array.cells[row][col], array.defect_map.get(addr, FAULT_FREE), v)
    array.shadow[row][col] = v
    array.pending_writes[row].add(col)


def read(array: MemoryArray, addr: Address) -> Bit:
    """Direct read of one cell; row-mates receive an indirect read."""
    _require_nm(array, "read")
    row, col = addr
    cell = array.cells[row][col]
    value = on_read(cell, array.defect_map.get(addr, FAULT_FREE))
    pending = array.pending_writes[row]
    for c in pending:
        array.cells[row][c].just_written = None
    pending.clear()
    # only defective row-mates can react beyond losing write adjacency
    for victim, behaviors in array.defect_map.items():
        if victim.row == row and victim.col != col:
            on_indirect_read(array.cells[row][victim.col], behaviors)
    return value


def on_lpm_enter(array: MemoryArray) -> None:
    if array.mode is PowerMode.LPM:
        raise SequencingError("array is already in low-power mode")
    array.mode = PowerMode.LPM
    for row, pending in enumerate(array.pending_writes):
        for c in pending:
            array.cells[row][c].just_written = None
        pending.clear()


def on_lpm_exit(array: MemoryArray) -> None:
    if array.mode is not PowerMode.LPM:
        raise SequencingError("array is not in low-power mode")
    array.mode = PowerMode.NM
    for addr, behaviors in array.defect_map.items():
        cell = array.cell(addr)
        flip = behaviors.get(LpmExitFlip)
        if flip is not None and cell.stored == flip.vulnerable:
            cell.stored = complement(flip.vulnerable)
            cell.cause = POST_LPM_FAIL
        post = behaviors.get(PostLpmReadFlip)
        if post is not None and cell.stored == post.vulnerable:
            cell.post_lpm_pending = True


def iddq_current(array: MemoryArray, profile: TechnologyProfile | None = None) -> float:
    """Quiescent current of the whole array in normal mode."""
    _require_nm(array, "IDDQ measurement")
    profile = profile or array.profile
    total = array.size * profile.iddq_baseline
    for addr, behaviors in array.defect_map.items():
        leak = behaviors.get(IddqLeak)
        if leak is not None and array.cell(addr).stored == leak.vulnerable:
            total += leak.delta
    return total
