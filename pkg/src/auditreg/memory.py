"""Simulated shared memory.

Each :class:`SimCell` supports read, write, swap, fetch&add and
compare&swap, every one applied as a single indivisible step and appended
to the cell's trace.  Cells are only mutated by the deterministic executor,
so there is no locking here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .history import format_value

__all__ = [
    "EMPTY",
    "MARK",
    "Memory",
    "Prim",
    "PrimitiveKind",
    "PrimitiveRecord",
    "SimCell",
    "WordOverflowError",
]


class Sentinel:
    """Internal marker that can never be a register value."""

    def __init__(self, token: str) -> None:
        self.token = token

    def __repr__(self) -> str:
        return self.token


# Swapped in by a reader to signal that it consumed the current value.
MARK = Sentinel("_mark_")
# Unwritten slot of a pairs array or audit log.
EMPTY = Sentinel("_empty_")


class WordOverflowError(OverflowError):
    pass


class PrimitiveKind(str, enum.Enum):
    READ = "read"
    WRITE = "write"
    SWAP = "swap"
    FETCH_ADD = "fetch_add"
    CAS = "cas"


@dataclass(frozen=True)
class PrimitiveRecord:
    step_seq: int
    process: int | None
    cell: str
    kind: PrimitiveKind
    args: tuple[Any, ...]
    returned: Any
    op_id: int | None = None

    def to_line(self) -> str:
        args = ";".join(format_value(a) for a in self.args) or "-"
        return "\t".join(
            [
                str(self.step_seq),
                "-" if self.process is None else str(self.process),
                self.cell,
                "-" if self.op_id is None else str(self.op_id),
                "prim",
                self.kind.value,
                args,
                format_value(self.returned),
            ]
        )


@dataclass(frozen=True)
class Prim:
    """A request, yielded by a step machine, to apply one primitive."""

    cell: SimCell
    kind: PrimitiveKind
    args: tuple[Any, ...] = ()


class Memory:
    """Owns a family of cells and the global step counter."""

    def __init__(self, width: int | None = 128) -> None:
        self.width = width
        self.cells: dict[str, SimCell] = {}
        self.trace: list[PrimitiveRecord] = []

    def cell(self, name: str, initial: Any, *, word: bool = False) -> SimCell:
        if name in self.cells:
            raise ValueError(f"duplicate cell {name!r}")
        c = SimCell(self, name, initial, word=word)
        self.cells[name] = c
        return c

    def apply(self, prim: Prim, process: int | None = None, op_id: int | None = None) -> Any:
        return prim.cell.apply(prim.kind, *prim.args, process=process, op_id=op_id)


@dataclass(eq=False)
class SimCell:
    memory: Memory
    name: str
    initial: Any
    word: bool = False
    contents: Any = field(init=False)
    trace: list[PrimitiveRecord] = field(default_factory=list, init=False)

    def __post_init__(self) -> None:
        if self.word:
            self._check_word(self.initial)
        self.contents = self.initial

    def __repr__(self) -> str:
        return f"SimCell({self.name!r}, {self.contents!r})"

    def _check_word(self, value: Any) -> None:
        if not isinstance(value, int) or value < 0:
            raise TypeError(f"word cell {self.name} holds nonnegative integers, got {value!r}")
        width = self.memory.width
        if width is not None and value.bit_length() > width:
            raise WordOverflowError(
                f"cell {self.name}: value needs {value.bit_length()} bits, guard is {width}"
            )

    def apply(self, kind: PrimitiveKind, *args: Any, process=None, op_id=None) -> Any:
        old = self.contents
        if kind is PrimitiveKind.READ:
            ret = old
        elif kind is PrimitiveKind.WRITE:
            (self.contents,) = args
            ret = None
        elif kind is PrimitiveKind.SWAP:
            (self.contents,) = args
            ret = old
        elif kind is PrimitiveKind.FETCH_ADD:
            if not self.word:
                raise TypeError(f"fetch_add on value cell {self.name}")
            (amount,) = args
            self.contents = old + amount
            ret = old
        elif kind is PrimitiveKind.CAS:
            expected, new = args
            ret = old == expected
            if ret:
                self.contents = new
        else:  # pragma: no cover
            raise ValueError(kind)
        if self.word and kind is not PrimitiveKind.READ:
            try:
                self._check_word(self.contents)
            except Exception:
                self.contents = old
                raise
        rec = PrimitiveRecord(len(self.memory.trace), process, self.name, kind, args, ret, op_id)
        self.trace.append(rec)
        self.memory.trace.append(rec)
        return ret

    def read(self, **who: Any) -> Any:
        return self.apply(PrimitiveKind.READ, **who)

    def write(self, v: Any, **who: Any) -> None:
        self.apply(PrimitiveKind.WRITE, v, **who)

    def swap(self, v: Any, **who: Any) -> Any:
        return self.apply(PrimitiveKind.SWAP, v, **who)

    def fetch_add(self, a: int, **who: Any) -> int:
        return self.apply(PrimitiveKind.FETCH_ADD, a, **who)

    def compare_and_swap(self, old: Any, new: Any, **who: Any) -> bool:
        return self.apply(PrimitiveKind.CAS, old, new, **who)

    def replay(self) -> bool:
        """Re-run the trace from the initial contents; True iff every
        recorded return value is reproduced and the final contents match."""
        contents = self.initial
        for rec in self.trace:
            if rec.kind is PrimitiveKind.READ:
                ret = contents
            elif rec.kind is PrimitiveKind.WRITE:
                contents, ret = rec.args[0], None
            elif rec.kind is PrimitiveKind.SWAP:
                contents, ret = rec.args[0], contents
            elif rec.kind is PrimitiveKind.FETCH_ADD:
                contents, ret = contents + rec.args[0], contents
            else:
                ret = contents == rec.args[0]
                if ret:
                    contents = rec.args[1]
            if ret != rec.returned:
                return False
        return contents == self.contents
