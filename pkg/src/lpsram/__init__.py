"""Behavioral simulation of resistive defects in low-power 6T-SRAM arrays.

The package models a back-biased SRAM array at the level of stored bits and
power modes, classifies resistive defects into behavioral fault primitives,
and runs March, LPR, IDDQ and RES style test programs against it.
"""
from lpsram.array import (
    Address,
    AddressOrder,
    CellState,
    MemoryArray,
    address_sequence,
    new_array,
    row_mates,
)
from lpsram.defects import (
    BehaviorSet,
    Defect,
    DefectKind,
    TechnologyProfile,
    canonicalize,
    classify_defect,
    validate_profile,
)
from lpsram.dsl import builtin, cost_estimate, format_program, parse_program
from lpsram.engine import execute, res_verdict, verdict_for_table
from lpsram.errors import ConfigError, ParseError, SequencingError

__all__ = [
    "Address",
    "AddressOrder",
    "BehaviorSet",
    "CellState",
    "ConfigError",
    "Defect",
    "DefectKind",
    "MemoryArray",
    "ParseError",
    "SequencingError",
    "TechnologyProfile",
    "address_sequence",
    "builtin",
    "canonicalize",
    "classify_defect",
    "cost_estimate",
    "execute",
    "format_program",
    "new_array",
    "parse_program",
    "res_verdict",
    "row_mates",
    "validate_profile",
    "verdict_for_table",
]

__version__ = "0.1.0"
