"""Events, operations and concurrent histories of auditable registers.

A history is an ordered sequence of invocation and response events.  This
module provides the real-time precedence relation between operations, the
completion construction used by both audit definitions, and the line-record
serialization shared by the scheduler, the checker and the command line.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

__all__ = [
    "BOTTOM",
    "AuditSet",
    "Event",
    "History",
    "HistoryError",
    "Kind",
    "OpRecord",
    "ParseError",
    "Phase",
    "Roles",
    "completions",
    "dumps",
    "format_value",
    "is_complete",
    "loads",
    "parse_value",
    "precedes",
]


class _Bottom:
    """The distinguished initial token; never a written value."""

    _instance: _Bottom | None = None

    def __new__(cls) -> _Bottom:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"

    def __str__(self) -> str:
        return "_|_"

    def __reduce__(self) -> str:
        return "BOTTOM"

    # Bottom sorts before every other token.
    def __lt__(self, other: object) -> bool:
        return other is not self

    def __gt__(self, other: object) -> bool:
        return False


BOTTOM = _Bottom()

# A set of (process, value) pairs reported by an audit.
AuditSet = frozenset


class HistoryError(ValueError):
    """Raised for ill-formed histories or queries on unknown operations."""


class ParseError(HistoryError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Kind(str, enum.Enum):
    WRITE = "write"
    READ = "read"
    AUDIT = "audit"


class Phase(str, enum.Enum):
    INVOKE = "invoke"
    RESPOND = "respond"


@dataclass(frozen=True)
class Roles:
    """Who may write, read and audit one register object."""

    writer: int
    readers: frozenset[int]
    auditors: frozenset[int]
    initial: Any = BOTTOM

    def allows(self, process: int, kind: Kind) -> bool:
        if kind is Kind.WRITE:
            return process == self.writer
        if kind is Kind.READ:
            return process in self.readers
        return process in self.auditors


@dataclass(frozen=True)
class Event:
    seq: int
    process: int
    obj: str
    op_id: int
    phase: Phase
    kind: Kind
    argument: Any = None
    result: Any = None


@dataclass(frozen=True)
class OpRecord:
    """One high-level operation as seen in a history."""

    op_id: int
    process: int
    obj: str
    kind: Kind
    argument: Any
    invoke: int
    respond: int | None = None
    result: Any = None

    @property
    def complete(self) -> bool:
        return self.respond is not None


@dataclass(frozen=True)
class History:
    events: tuple[Event, ...]
    roles: Mapping[str, Roles] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "roles", dict(self.roles))

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, History):
            return NotImplemented
        return self.events == other.events and self.roles == other.roles

    def __hash__(self) -> int:
        return hash(self.events)

    def operations(self) -> dict[int, OpRecord]:
        """Map op_id to its record, in order of invocation."""
        ops: dict[int, OpRecord] = {}
        for ev in self.events:
            if ev.phase is Phase.INVOKE:
                ops[ev.op_id] = OpRecord(
                    ev.op_id, ev.process, ev.obj, ev.kind, ev.argument, ev.seq
                )
            else:
                rec = ops.get(ev.op_id)
                if rec is None:
                    raise HistoryError(f"response before invocation for op {ev.op_id}")
                ops[ev.op_id] = replace(rec, respond=ev.seq, result=ev.result)
        return ops

    def objects(self) -> list[str]:
        seen = dict.fromkeys(self.roles)
        for ev in self.events:
            seen.setdefault(ev.obj)
        return list(seen)

    def initial(self, obj: str) -> Any:
        roles = self.roles.get(obj)
        return BOTTOM if roles is None else roles.initial

    def for_object(self, obj: str) -> History:
        roles = {obj: self.roles[obj]} if obj in self.roles else {}
        return History(tuple(ev for ev in self.events if ev.obj == obj), roles)

    def pending(self) -> list[OpRecord]:
        return [op for op in self.operations().values() if not op.complete]

    def validate(self) -> None:
        """Raise HistoryError unless the history is well formed.

        Checks distinct increasing sequence numbers, matched invoke/respond
        pairs, per-process sequentiality and role confinement.
        """
        last_seq = None
        open_ops: dict[int, int] = {}  # process -> op_id
        seen_ops: set[int] = set()
        kinds: dict[int, Event] = {}
        for ev in self.events:
            if last_seq is not None and ev.seq <= last_seq:
                raise HistoryError(f"global_seq not increasing at {ev.seq}")
            last_seq = ev.seq
            if ev.phase is Phase.INVOKE:
                if ev.op_id in seen_ops:
                    raise HistoryError(f"op {ev.op_id} invoked twice")
                if ev.process in open_ops:
                    raise HistoryError(
                        f"process {ev.process} invokes op {ev.op_id} while "
                        f"op {open_ops[ev.process]} is pending"
                    )
                roles = self.roles.get(ev.obj)
                if roles is not None and not roles.allows(ev.process, ev.kind):
                    raise HistoryError(
                        f"process {ev.process} may not {ev.kind.value} {ev.obj}"
                    )
                seen_ops.add(ev.op_id)
                open_ops[ev.process] = ev.op_id
                kinds[ev.op_id] = ev
            else:
                inv = kinds.get(ev.op_id)
                if inv is None or open_ops.get(ev.process) != ev.op_id:
                    raise HistoryError(f"unmatched response for op {ev.op_id}")
                if (inv.process, inv.obj, inv.kind) != (ev.process, ev.obj, ev.kind):
                    raise HistoryError(f"response fields differ from invocation of op {ev.op_id}")
                del open_ops[ev.process]

    def written_values(self, obj: str | None = None) -> list[Any]:
        return [
            ev.argument
            for ev in self.events
            if ev.phase is Phase.INVOKE
            and ev.kind is Kind.WRITE
            and (obj is None or ev.obj == obj)
        ]


def _lookup(h: History, op_id: int) -> OpRecord:
    ops = h.operations()
    if op_id not in ops:
        raise HistoryError(f"unknown op_id {op_id}")
    return ops[op_id]


def is_complete(h: History, op_id: int) -> bool:
    return _lookup(h, op_id).complete


def precedes(h: History, a: int, b: int) -> bool:
    """True iff operation ``a`` responds before ``b`` is invoked."""
    op_a, op_b = _lookup(h, a), _lookup(h, b)
    return op_a.respond is not None and op_a.respond < op_b.invoke


def completions(h: History) -> Iterator[History]:
    """Enumerate complete(h).

    Every pending operation is either discarded or given a response appended
    after the last event.  Pending reads may respond with the initial value
    or any value written in ``h``; pending audits are always discarded.
    """
    ops = h.operations()
    pending = [op for op in ops.values() if not op.complete]
    choices: list[list[Any]] = []
    for op in pending:
        if op.kind is Kind.READ:
            candidates = [h.initial(op.obj)] + h.written_values(op.obj)
            choices.append([_DISCARD] + list(dict.fromkeys(candidates)))
        elif op.kind is Kind.WRITE:
            choices.append([_DISCARD, None])
        else:
            choices.append([_DISCARD])
    last = h.events[-1].seq if h.events else -1
    for combo in itertools.product(*choices):
        dropped = {op.op_id for op, c in zip(pending, combo) if c is _DISCARD}
        events = [ev for ev in h.events if ev.op_id not in dropped]
        seq = last
        for op, c in zip(pending, combo):
            if c is _DISCARD:
                continue
            seq += 1
            events.append(
                Event(seq, op.process, op.obj, op.op_id, Phase.RESPOND, op.kind, op.argument, c)
            )
        yield History(tuple(events), h.roles)


_DISCARD = object()


# -- line-record serialization ------------------------------------------------

_NONE = "-"
_BOTTOM_TOKEN = "_|_"


def format_value(v: Any) -> str:
    if v is None:
        return _NONE
    if v is BOTTOM:
        return _BOTTOM_TOKEN
    if isinstance(v, (set, frozenset)):
        items = sorted(v, key=_pair_key)
        return "{" + ",".join(f"{p}:{format_value(x)}" for p, x in items) + "}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    # Internal sentinels of the simulated memory print by name.
    name = getattr(v, "token", None)
    if name is not None:
        return name
    raise TypeError(f"cannot serialize value {v!r}")


def _pair_key(pair: tuple[int, Any]) -> tuple[int, int, Any]:
    p, v = pair
    return (p, 0, 0) if v is BOTTOM else (p, 1, v)


def parse_value(token: str) -> Any:
    if token == _NONE:
        return None
    if token == _BOTTOM_TOKEN:
        return BOTTOM
    if token in ("true", "false"):
        return token == "true"
    if token.startswith("{") and token.endswith("}"):
        body = token[1:-1]
        if not body:
            return frozenset()
        pairs = []
        for item in body.split(","):
            p, sep, v = item.partition(":")
            if not sep:
                raise ValueError(f"bad audit pair {item!r}")
            pairs.append((int(p), parse_value(v)))
        return frozenset(pairs)
    return int(token)


def _format_ids(ids: Iterable[int]) -> str:
    return ",".join(str(i) for i in sorted(ids)) or _NONE


def _parse_ids(token: str) -> frozenset[int]:
    return frozenset() if token == _NONE else frozenset(int(t) for t in token.split(","))


def dumps(h: History, trace: Iterable[Any] = ()) -> str:
    """Serialize a history, optionally followed by primitive trace records.

    Each event is one tab-separated line: global_seq, process, object, op_id,
    phase, kind, argument, result.  Object roles are ``#object`` header lines.
    Primitive records use ``prim`` as their phase field.
    """
    lines = []
    for obj, r in h.roles.items():
        lines.append(
            "\t".join(
                [
                    "#object",
                    obj,
                    f"init={format_value(r.initial)}",
                    f"writer={r.writer}",
                    f"readers={_format_ids(r.readers)}",
                    f"auditors={_format_ids(r.auditors)}",
                ]
            )
        )
    for ev in h.events:
        lines.append(
            "\t".join(
                [
                    str(ev.seq),
                    str(ev.process),
                    ev.obj,
                    str(ev.op_id),
                    ev.phase.value,
                    ev.kind.value,
                    format_value(ev.argument),
                    format_value(ev.result),
                ]
            )
        )
    for rec in trace:
        lines.append(rec.to_line())
    return "\n".join(lines) + "\n"


def loads(text: str) -> History:
    """Parse the line format produced by :func:`dumps`.

    Primitive trace lines are skipped.  Raises :class:`ParseError` naming
    the offending line.
    """
    roles: dict[str, Roles] = {}
    events: list[Event] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        if fields[0] == "#object":
            roles[fields[1]] = _parse_roles(lineno, fields)
            continue
        if line.startswith("#"):
            continue
        if len(fields) != 8:
            raise ParseError(lineno, f"expected 8 fields, got {len(fields)}")
        if fields[4] == "prim":
            continue
        try:
            seq, process, obj, op_id = int(fields[0]), int(fields[1]), fields[2], int(fields[3])
            phase, kind = Phase(fields[4]), Kind(fields[5])
            argument, result = parse_value(fields[6]), parse_value(fields[7])
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        events.append(Event(seq, process, obj, op_id, phase, kind, argument, result))
    h = History(tuple(events), roles)
    try:
        h.validate()
    except HistoryError as exc:
        raise ParseError(len(text.splitlines()), f"ill-formed history: {exc}") from None
    return h


def _parse_roles(lineno: int, fields: list[str]) -> Roles:
    if len(fields) != 6:
        raise ParseError(lineno, "#object header needs 6 fields")
    attrs = {}
    for item in fields[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(lineno, f"bad header attribute {item!r}")
        attrs[key] = value
    try:
        return Roles(
            writer=int(attrs["writer"]),
            readers=_parse_ids(attrs["readers"]),
            auditors=_parse_ids(attrs["auditors"]),
            initial=parse_value(attrs["init"]),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(lineno, f"bad #object header: {exc}") from None
