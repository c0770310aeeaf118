"""Exception types shared across the package."""
from __future__ import annotations


class ConfigError(ValueError):
    """Invalid dimensions, profile values, or defect descriptions."""


class SequencingError(RuntimeError):
    """An operation was issued in the wrong power mode."""


class ParseError(ValueError):
    """Malformed test program or defect label.

    ``line``/``column`` locate syntax errors (1-based); ``item`` is the
    0-based item index for static violations of a well-formed program.
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, item: int | None = None):
        self.line = line
        self.column = column
        self.item = item
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if item is not None:
            where.append(f"item {item}")
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)
        self.message = message
