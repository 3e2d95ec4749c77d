"""Auditable register implementations as step machines.

Every high-level operation is a generator.  Each ``yield`` hands one
:class:`~auditreg.memory.Prim` request to the executor, which applies it
atomically and sends back the primitive's return value; the generator's
return value is the operation's response.  Code between two yields is local
computation and costs no scheduling slot.

Local variables of the pseudocode live on the register object, keyed by
process where several processes play the same role.  They persist across
operations.
"""

from __future__ import annotations

from collections.abc import Generator
from dataclasses import dataclass
from typing import Any

from .codec import ValueTable, WordCodec
from .history import BOTTOM, Kind, Roles
from .memory import EMPTY, MARK, Memory, Prim, PrimitiveKind, SimCell

__all__ = [
    "ALGORITHMS",
    "MUTANTS",
    "AuditableRegister",
    "CasRegister",
    "FetchAddRegister",
    "RegisterConfig",
    "RegularRegister",
    "RoleError",
    "SequencedRegister",
    "SwapRegister",
    "make_register",
]

OpGen = Generator[Prim, Any, Any]

_READ = PrimitiveKind.READ
_WRITE = PrimitiveKind.WRITE
_SWAP = PrimitiveKind.SWAP
_FAA = PrimitiveKind.FETCH_ADD
_CAS = PrimitiveKind.CAS


class RoleError(Exception):
    """An operation was invoked by a process outside its role."""


@dataclass(frozen=True)
class RegisterConfig:
    algorithm: str
    writer: int
    readers: tuple[int, ...]
    auditors: tuple[int, ...]
    initial: Any = BOTTOM

    def __post_init__(self) -> None:
        object.__setattr__(self, "readers", tuple(self.readers))
        object.__setattr__(self, "auditors", tuple(self.auditors))

    @property
    def n(self) -> int:
        return len(self.readers)

    def roles(self) -> Roles:
        return Roles(self.writer, frozenset(self.readers), frozenset(self.auditors), self.initial)


class AuditableRegister:
    """Shared plumbing: role checks and dispatch to the algorithm's operations."""

    single_reader = False
    single_auditor = False
    # Whether the writer may also appear among the readers.
    writer_may_read = True

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        self.name = name
        self.config = config
        self.memory = memory
        self._validate()

    def _validate(self) -> None:
        c = self.config
        if not c.readers:
            raise RoleError(f"{self.name}: at least one reader is required")
        if len(set(c.readers)) != len(c.readers) or len(set(c.auditors)) != len(c.auditors):
            raise RoleError(f"{self.name}: duplicate process in a role set")
        if self.single_reader and len(c.readers) != 1:
            raise RoleError(f"{self.name}: {c.algorithm} supports exactly one reader")
        if not self.writer_may_read and c.writer in c.readers:
            raise RoleError(f"{self.name}: writer cannot be a reader under {c.algorithm}")
        if c.writer not in c.auditors:
            raise RoleError(f"{self.name}: the writer must be an auditor")
        if self.single_auditor and set(c.auditors) != {c.writer}:
            raise RoleError(f"{self.name}: {c.algorithm} is audited by its writer only")
        if c.initial is MARK or c.initial is EMPTY:
            raise ValueError("internal sentinel used as initial value")

    def operation(self, process: int, kind: Kind, argument: Any = None) -> OpGen:
        if not self.config.roles().allows(process, kind):
            raise RoleError(f"process {process} may not {kind.value} {self.name}")
        if kind is Kind.WRITE:
            if argument is BOTTOM or argument is None:
                raise ValueError("BOTTOM is never a written value")
            return self.write(process, argument)
        if kind is Kind.READ:
            return self.read(process)
        return self.audit(process)

    def write(self, process: int, v: Any) -> OpGen:
        raise NotImplementedError

    def read(self, process: int) -> OpGen:
        raise NotImplementedError

    def audit(self, process: int) -> OpGen:
        raise NotImplementedError

    def cells(self) -> list[SimCell]:
        prefix = self.name + "."
        return [c for name, c in self.memory.cells.items() if name.startswith(prefix)]


class SwapRegister(AuditableRegister):
    """Single reader, audited by the writer; one cell accessed with swap.

    The reader swaps a marker into ``R``; a writer whose swap returns the
    marker learns that the previous value was read.
    """

    single_reader = True
    single_auditor = True
    writer_may_read = False

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.R = memory.cell(f"{name}.R", config.initial)
        self.reader = config.readers[0]
        self.read_result: Any = BOTTOM
        self.curr_val: Any = config.initial
        self.prev_val: Any = BOTTOM
        self.audit_result: set[tuple[int, Any]] = set()

    def read(self, process: int) -> OpGen:
        val = yield Prim(self.R, _SWAP, (MARK,))
        if val is not MARK:
            self.read_result = val
        return self.read_result

    def write(self, process: int, v: Any) -> OpGen:
        self.prev_val = self.curr_val
        self.curr_val = v
        if (yield Prim(self.R, _SWAP, (v,))) is MARK:
            self.audit_result.add((self.reader, self.prev_val))
        return None

    def audit(self, process: int) -> OpGen:
        if (yield Prim(self.R, _READ)) is MARK:
            self.audit_result.add((self.reader, self.curr_val))
        return frozenset(self.audit_result)


class _WordRegister(AuditableRegister):
    with_sn = True

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.values = ValueTable(config.initial)
        self.codec = WordCodec(self.n_bits, with_sn=self.with_sn)
        self.bit = {p: i for i, p in enumerate(config.readers)}
        self.R = memory.cell(f"{name}.R", self.encode(config.initial), word=True)
        self.read_result: dict[int, Any] = {p: BOTTOM for p in config.readers}
        self.audit_result: dict[int, set[tuple[int, Any]]] = {p: set() for p in config.auditors}

    @property
    def n_bits(self) -> int:
        return self.config.n

    def encode(self, v: Any, sn: int = 0, bits: tuple[int, ...] | None = None) -> int:
        return self.codec.encode(self.values.code(v), sn, bits)

    def value_of(self, word: int) -> Any:
        return self.values.value(self.codec.get_value(word))

    def _fetch_read(self, process: int) -> OpGen:
        # Shared by the multi-reader algorithms: set my bit once per value.
        i = self.bit[process]
        val = yield Prim(self.R, _READ)
        if self.codec.get_bit(val, i) == 0:
            old = yield Prim(self.R, _FAA, (1 << i,))
            self.read_result[process] = self.value_of(old)
        return self.read_result[process]


class FetchAddRegister(_WordRegister):
    """Multi-reader, audited by the writer; swap plus fetch&add on one word.

    Reader ``p_i`` owns bit ``i`` of the word and sets it with fetch&add the
    first time it reads a value.  A write swaps in a word with all bits clear
    and credits every reader whose bit was set with the previous value.
    """

    single_auditor = True
    with_sn = False

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.curr_val: Any = config.initial
        self.prev_val: Any = BOTTOM

    def read(self, process: int) -> OpGen:
        return (yield from self._fetch_read(process))

    def write(self, process: int, v: Any) -> OpGen:
        self.prev_val = self.curr_val
        self.curr_val = v
        val = yield Prim(self.R, _SWAP, (self.encode(v),))
        self._credit(val, self.prev_val)
        return None

    def audit(self, process: int) -> OpGen:
        val = yield Prim(self.R, _READ)
        self._credit(val, self.curr_val)
        return frozenset(self.audit_result[process])

    def _credit(self, word: int, value: Any) -> None:
        result = self.audit_result[self.config.writer]
        for j, b in enumerate(self.codec.get_bits(word)):
            if b:
                result.add((self.config.readers[j], value))


class SequencedRegister(_WordRegister):
    """Single reader, many auditors; swap and fetch&add plus a pairs array.

    ``pairs[k]`` holds the value of the k-th write once somebody learns that
    the reader read it.  Auditors scan ``pairs`` down from the current
    sequence number.
    """

    single_reader = True
    writer_may_read = False

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.reader = config.readers[0]
        self.sn = 0
        self.audit_index: dict[int, int] = {p: 0 for p in config.auditors}
        self._pairs: dict[int, SimCell] = {}

    @property
    def n_bits(self) -> int:
        return 1

    def pairs(self, k: int) -> SimCell:
        cell = self._pairs.get(k)
        if cell is None:
            cell = self._pairs[k] = self.memory.cell(f"{self.name}.pairs[{k}]", EMPTY)
        return cell

    def write(self, process: int, v: Any) -> OpGen:
        self.sn += 1
        temp = yield Prim(self.R, _SWAP, (self.encode(v, self.sn, (0,)),))
        if self.codec.get_bit(temp) == 1:
            yield Prim(self.pairs(self.codec.get_sn(temp)), _WRITE, (self.value_of(temp),))
        return None

    def read(self, process: int) -> OpGen:
        temp = yield Prim(self.R, _READ)
        if self.codec.get_bit(temp) == 0:
            temp = yield Prim(self.R, _FAA, (1,))
            self.read_result[process] = self.value_of(temp)
            yield Prim(self.pairs(self.codec.get_sn(temp)), _WRITE, (self.read_result[process],))
        return self.read_result[process]

    def audit(self, process: int) -> OpGen:
        temp = yield Prim(self.R, _READ)
        index = self.audit_index[process] = self.codec.get_sn(temp)
        if self.codec.get_bit(temp) == 1:
            yield Prim(self.pairs(index), _WRITE, (self.value_of(temp),))
        result = self.audit_result[process]
        for j in range(index, -1, -1):
            x = yield Prim(self.pairs(j), _READ)
            if x is not EMPTY:
                result.add((self.reader, x))
        return frozenset(result)


class CasRegister(_WordRegister):
    """Multi-reader, multi-auditor; compare&swap and fetch&add plus a pairs matrix.

    The writer installs each new word with compare&swap against the state it
    last saw.  A failed attempt means some reader set its bit; the writer
    logs those readers in ``pairs[j][sn-1]`` and retries.
    """

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.sn = 0
        self.val: Any = config.initial
        self.bits = (0,) * self.n_bits
        self.audit_index: dict[int, int] = {p: 0 for p in config.auditors}
        self._pairs: dict[tuple[int, int], SimCell] = {}
        # Failed compare&swap count of every completed write, in order.
        self.cas_failures: list[int] = []
        self.current_failures = 0

    def pairs(self, j: int, k: int) -> SimCell:
        cell = self._pairs.get((j, k))
        if cell is None:
            cell = self._pairs[j, k] = self.memory.cell(f"{self.name}.pairs[{j}][{k}]", EMPTY)
        return cell

    def write(self, process: int, v: Any) -> OpGen:
        self.sn += 1
        self.current_failures = 0
        new = self.encode(v, self.sn)
        while not (yield Prim(self.R, _CAS, (self.encode(self.val, self.sn - 1, self.bits), new))):
            self.current_failures += 1
            temp = yield Prim(self.R, _READ)
            self.bits = self.codec.get_bits(temp)
            yield from self._log_readers()
        self.cas_failures.append(self.current_failures)
        self.bits = (0,) * self.n_bits
        self.val = v
        return None

    def _log_readers(self) -> OpGen:
        for j in range(self.n_bits):
            if self.bits[j] == 1:
                yield Prim(self.pairs(j, self.sn - 1), _WRITE, (self.val,))

    def read(self, process: int) -> OpGen:
        return (yield from self._fetch_read(process))

    def audit(self, process: int) -> OpGen:
        temp = yield Prim(self.R, _READ)
        index = self.audit_index[process] = self.codec.get_sn(temp)
        result = self.audit_result[process]
        readers = self.config.readers
        for j in range(self.n_bits):
            for k in range(index):
                x = yield Prim(self.pairs(j, k), _READ)
                if x is not EMPTY:
                    result.add((readers[j], x))
        for j, b in enumerate(self.codec.get_bits(temp)):
            if b == 1:
                result.add((readers[j], self.value_of(temp)))
        return frozenset(result)


class RegularRegister(AuditableRegister):
    """Regular audit from plain reads and writes.

    Each reader publishes its cumulative read log in its own cell; auditors
    union every reader's log.
    """

    def __init__(self, name: str, config: RegisterConfig, memory: Memory) -> None:
        super().__init__(name, config, memory)
        self.R_v = memory.cell(f"{name}.R_v", config.initial)
        self.R_a = {p: memory.cell(f"{name}.R_a[{p}]", EMPTY) for p in config.readers}
        self.read_log: dict[int, set[tuple[int, Any]]] = {p: set() for p in config.readers}
        self.read_result: dict[int, Any] = {p: BOTTOM for p in config.readers}
        self.audit_result: dict[int, set[tuple[int, Any]]] = {p: set() for p in config.auditors}

    def read(self, process: int) -> OpGen:
        self.read_result[process] = yield Prim(self.R_v, _READ)
        self.read_log[process].add((process, self.read_result[process]))
        yield Prim(self.R_a[process], _WRITE, (frozenset(self.read_log[process]),))
        return self.read_result[process]

    def write(self, process: int, v: Any) -> OpGen:
        yield Prim(self.R_v, _WRITE, (v,))
        return None

    def audit(self, process: int) -> OpGen:
        result = self.audit_result[process]
        for j in self.config.readers:
            log = yield Prim(self.R_a[j], _READ)
            if log is not EMPTY:
                result.update(log)
        return frozenset(result)


# -- seeded faults ------------------------------------------------------------


class _NoAuditRead(SwapRegister):
    """Audit returns the collected pairs without looking at R."""

    def audit(self, process: int) -> OpGen:
        return frozenset(self.audit_result)
        yield  # pragma: no cover


class _ReadWithoutSwap(SwapRegister):
    """Reader reads R instead of swapping the marker in."""

    def read(self, process: int) -> OpGen:
        val = yield Prim(self.R, _READ)
        if val is not MARK:
            self.read_result = val
        return self.read_result


class _NoBitReset(FetchAddRegister):
    """Writer carries the reader bits of the old word into the new one."""

    def write(self, process: int, v: Any) -> OpGen:
        self.prev_val = self.curr_val
        self.curr_val = v
        old = yield Prim(self.R, _READ)
        val = yield Prim(self.R, _SWAP, (self.encode(v, 0, self.codec.get_bits(old)),))
        self._credit(val, self.prev_val)
        return None


class _NoPairsLog(CasRegister):
    """Writer retries compare&swap without recording readers in pairs."""

    def _log_readers(self) -> OpGen:
        return
        yield  # pragma: no cover


ALGORITHMS: dict[str, type[AuditableRegister]] = {
    "a3": SwapRegister,
    "a4": FetchAddRegister,
    "a5": SequencedRegister,
    "a6": CasRegister,
    "a7": RegularRegister,
}

MUTANTS: dict[str, type[AuditableRegister]] = {
    "a3-mutant-noauditread": _NoAuditRead,
    "a3-mutant-readnoswap": _ReadWithoutSwap,
    "a4-mutant-nobitreset": _NoBitReset,
    "a6-mutant-nopairslog": _NoPairsLog,
}


def base_algorithm(tag: str) -> str:
    """``a4-mutant-nobitreset`` -> ``a4``."""
    return tag.split("-", 1)[0]


def make_register(name: str, config: RegisterConfig, memory: Memory) -> AuditableRegister:
    cls = ALGORITHMS.get(config.algorithm) or MUTANTS.get(config.algorithm)
    if cls is None:
        raise ValueError(f"unknown algorithm {config.algorithm!r}")
    return cls(name, config, memory)
