"""Resistive defects, technology thresholds and behavioral classification.

A defect is one of three canonical resistive paths inside the cell, with a
polarity naming the stored value under which it acts. The classifier maps the
defect resistance onto the set of behavioral fault primitives the cell shows
in that resistance range.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterator, Union

from lpsram.array import Address, Bit, complement
from lpsram.errors import ConfigError, ParseError


class DefectKind(enum.Enum):
    R1 = "R1"  # bridge from a rail to an inverter gate
    R2 = "R2"  # open on a pull-down source
    R3 = "R3"  # open between pass transistor and storage node


# symmetric equivalents of the three canonical defects
_LABELS: dict[str, tuple[DefectKind, Bit]] = {
    "R1": (DefectKind.R1, 0),
    "R8": (DefectKind.R1, 0),
    "R4": (DefectKind.R1, 1),
    "R7": (DefectKind.R1, 1),
    "R2": (DefectKind.R2, 0),
    "R9": (DefectKind.R2, 0),
    "R5": (DefectKind.R2, 1),
    "R10": (DefectKind.R2, 1),
    "R3": (DefectKind.R3, 1),
    "R6": (DefectKind.R3, 0),
}


def canonicalize(label: str) -> tuple[DefectKind, Bit]:
    """Map a defect label R1..R10 to its canonical kind and vulnerable value."""
    try:
        return _LABELS[label.strip().upper()]
    except KeyError:
        raise ParseError(f"unknown defect label {label!r}") from None


@dataclass(frozen=True)
class Defect:
    kind: DefectKind
    polarity: Bit
    resistance: float
    location: Address = Address(0, 0)

    def __post_init__(self):
        if self.polarity not in (0, 1):
            raise ConfigError(f"polarity must be 0 or 1, got {self.polarity!r}")
        if not (self.resistance > 0) or math.isinf(self.resistance):
            raise ConfigError(f"resistance must be positive and finite, got {self.resistance!r}")
        object.__setattr__(self, "location", Address(*self.location))

    def mirrored(self) -> "Defect":
        return replace(self, polarity=complement(self.polarity))


# ---------------------------------------------------------------------------
# Behavioral fault primitives


@dataclass(frozen=True)
class StuckAt:
    value: Bit


@dataclass(frozen=True)
class TransitionFault:
    to: Bit


@dataclass(frozen=True)
class RawFlip:
    vulnerable: Bit


@dataclass(frozen=True)
class LpmExitFlip:
    vulnerable: Bit


@dataclass(frozen=True)
class PostLpmReadFlip:
    vulnerable: Bit


@dataclass(frozen=True)
class ResFlip:
    vulnerable: Bit
    k: int


@dataclass(frozen=True)
class IddqLeak:
    vulnerable: Bit
    delta: float


Behavior = Union[StuckAt, TransitionFault, RawFlip, LpmExitFlip,
                 PostLpmReadFlip, ResFlip, IddqLeak]


def _mirror(b: Behavior) -> Behavior:
    f = fields(b)[0].name
    return replace(b, **{f: complement(getattr(b, f))})


class BehaviorSet:
    """Active fault primitives of one cell, at most one per primitive type.

    An empty set behaves exactly like a fault-free cell. ``StuckAt`` never
    coexists with anything else.
    """

    __slots__ = ("_by_type",)

    def __init__(self, behaviors=()):
        by_type: dict[type, Behavior] = {}
        for b in behaviors:
            if type(b) in by_type:
                raise ConfigError(f"duplicate behavior variant {type(b).__name__}")
            by_type[type(b)] = b
        if StuckAt in by_type and len(by_type) > 1:
            raise ConfigError("StuckAt cannot be combined with other behaviors")
        self._by_type = by_type

    def get(self, kind: type):
        return self._by_type.get(kind)

    def __iter__(self) -> Iterator[Behavior]:
        return iter(self._by_type.values())

    def __len__(self) -> int:
        return len(self._by_type)

    def __contains__(self, b) -> bool:
        return self._by_type.get(type(b)) == b

    def __eq__(self, other) -> bool:
        if not isinstance(other, BehaviorSet):
            return NotImplemented
        return self._by_type == other._by_type

    def __hash__(self) -> int:
        return hash(frozenset(self._by_type.values()))

    def __repr__(self) -> str:
        inner = ", ".join(repr(b) for b in sorted(self, key=lambda b: type(b).__name__))
        return f"BehaviorSet({{{inner}}})"

    def mirrored(self) -> "BehaviorSet":
        return BehaviorSet(_mirror(b) for b in self)

    def names(self) -> list[str]:
        return sorted(type(b).__name__ for b in self)


FAULT_FREE = BehaviorSet()

# ---------------------------------------------------------------------------
# Technology profile


@dataclass(frozen=True)
class TechnologyProfile:
    """Threshold set and cost/current constants for one technology.

    Resistances are in ohms, currents in abstract units, times in cycles.
    """

    r1_low: float = 20e3
    r1_high: float = 35e3
    r1_res_sub: tuple[float, float] = (28e3, 32e3)
    r2_low: float = 3e6
    r2_high: float = 15e6
    r3_low: float = 30e3
    res_k: int = 64
    iddq_baseline: float = 1.0
    iddq_delta: float = 10.0
    iddq_threshold_margin: float = 5.0
    t_lpm: int = 100_000
    t_iddq: int = 1_000

    def __post_init__(self):
        object.__setattr__(self, "r1_res_sub", tuple(self.r1_res_sub))

    def iddq_threshold(self, cells: int) -> float:
        return cells * self.iddq_baseline + self.iddq_threshold_margin

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r1_res_sub"] = list(self.r1_res_sub)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TechnologyProfile":
        if not isinstance(data, dict):
            raise ConfigError("profile JSON must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown profile field(s): {', '.join(unknown)}")
        if "r1_res_sub" in data:
            sub = data["r1_res_sub"]
            if not (isinstance(sub, (list, tuple)) and len(sub) == 2):
                raise ConfigError("r1_res_sub must be a two-element list [low, high]")
        for name in ("res_k", "t_lpm", "t_iddq"):
            if name in data and (isinstance(data[name], bool) or not isinstance(data[name], int)):
                raise ConfigError(f"{name} must be an integer")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "TechnologyProfile":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


DEFAULT_PROFILE = TechnologyProfile()


def validate_profile(profile: TechnologyProfile) -> list[str]:
    """Return the violated profile relations; an empty list means valid."""
    p = profile
    bad = []

    def check(ok: bool, relation: str) -> None:
        if not ok:
            bad.append(relation)

    sub_lo, sub_hi = p.r1_res_sub
    check(p.r1_low > 0, "r1_low > 0")
    check(p.r1_low < p.r1_high, "r1_low < r1_high")
    check(p.r1_low < sub_lo <= sub_hi < p.r1_high,
          "r1_res_sub: sub-range inside (r1_low, r1_high)")
    check(p.r2_low > 0, "r2_low > 0")
    check(p.r2_low < p.r2_high, "r2_low < r2_high")
    check(p.r3_low > 0, "r3_low > 0")
    check(p.res_k >= 1, "res_k >= 1")
    check(p.iddq_threshold_margin > 0, "iddq_threshold_margin > 0")
    check(p.iddq_delta > p.iddq_threshold_margin, "iddq_delta > iddq_threshold_margin")
    check(p.t_lpm >= 1, "t_lpm >= 1")
    check(p.t_iddq >= 1, "t_iddq >= 1")
    return bad


def require_valid(profile: TechnologyProfile) -> TechnologyProfile:
    bad = validate_profile(profile)
    if bad:
        raise ConfigError("invalid technology profile: " + "; ".join(bad))
    return profile


# ---------------------------------------------------------------------------
# Classification


def classify_defect(defect: Defect, profile: TechnologyProfile = DEFAULT_PROFILE) -> BehaviorSet:
    """Behavioral fault set of a defective cell.

    Lower range bounds are inclusive and upper bounds exclusive, except that
    ``r1_high`` still belongs to the R1 middle range and ``r2_high`` opens the
    R2 high range.
    """
    p, r = defect.polarity, defect.resistance
    if not r > 0:
        raise ConfigError(f"resistance must be positive, got {r!r}")

    if defect.kind is DefectKind.R1:
        if r < profile.r1_low:
            return BehaviorSet([StuckAt(complement(p))])
        if r <= profile.r1_high:
            found: list[Behavior] = [LpmExitFlip(p), IddqLeak(p, profile.iddq_delta)]
            lo, hi = profile.r1_res_sub
            if lo <= r <= hi:
                found.append(ResFlip(p, profile.res_k))
            return BehaviorSet(found)
        return FAULT_FREE

    if defect.kind is DefectKind.R2:
        if r < profile.r2_low:
            return FAULT_FREE
        if r < profile.r2_high:
            return BehaviorSet([RawFlip(p)])
        return BehaviorSet([RawFlip(p), PostLpmReadFlip(p)])

    if defect.kind is DefectKind.R3:
        if r < profile.r3_low:
            return FAULT_FREE
        return BehaviorSet([TransitionFault(p)])

    raise ConfigError(f"unsupported defect kind {defect.kind!r}")
