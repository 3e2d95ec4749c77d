"""Deterministic executor and schedule exploration.

Processes run *programs*: generators that yield :class:`Invoke` requests for
high-level register operations and receive their responses.  The executor
interleaves processes one primitive at a time.  Invocation is recorded
together with an operation's first primitive and the response together with
its last, so every operation interval is as tight as the schedule allows.

Exhaustive exploration walks the tree of scheduling choices depth first,
replaying a prefix from a fresh executor whenever it backtracks.
"""

from __future__ import annotations

import random
import re
from collections.abc import Callable, Generator, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

from .history import BOTTOM, Event, History, Kind, Phase, parse_value
from .memory import Memory, Prim
from .registers import AuditableRegister, RegisterConfig, RoleError, make_register

__all__ = [
    "Crash",
    "ExplorationBoundError",
    "Executor",
    "Invoke",
    "Run",
    "Schedule",
    "ScheduleError",
    "StepOutcome",
    "Workload",
    "explore_exhaustive",
    "explore_random",
    "parse_workload",
    "run",
]

Program = Generator["Invoke", Any, Any]


class ScheduleError(ValueError):
    """The schedule asks a process to step when it cannot."""


class ExplorationBoundError(RuntimeError):
    """An execution exceeded the configured step bound."""


@dataclass(frozen=True)
class Invoke:
    obj: str
    kind: Kind
    argument: Any = None


@dataclass(frozen=True)
class Crash:
    process: int


Action = Union[int, Crash]


@dataclass
class Workload:
    """Register objects plus one program per process.

    A program is either a list of :class:`Invoke` (a script) or a zero-argument
    callable returning a fresh program generator.
    """

    registers: dict[str, RegisterConfig]
    programs: dict[int, Sequence[Invoke] | Callable[[], Program]]
    width: int | None = 128

    def __post_init__(self) -> None:
        self.programs = dict(sorted(self.programs.items()))
        self.validate()

    def validate(self) -> None:
        written: list[Any] = []
        for pid, prog in self.programs.items():
            if callable(prog):
                continue
            for op in prog:
                cfg = self.registers.get(op.obj)
                if cfg is None:
                    raise ValueError(f"process {pid} uses unknown object {op.obj!r}")
                if not cfg.roles().allows(pid, op.kind):
                    raise RoleError(f"process {pid} may not {op.kind.value} {op.obj}")
                if op.kind is Kind.WRITE:
                    written.append((op.obj, op.argument))
        if len(written) != len(set(written)):
            raise ValueError("written values must be pairwise distinct per object")

    def program(self, pid: int) -> Program:
        prog = self.programs[pid]
        if callable(prog):
            return prog()
        return _script(prog)


def _script(ops: Sequence[Invoke]) -> Program:
    results = []
    for op in ops:
        results.append((yield op))
    return results


@dataclass(frozen=True)
class StepOutcome:
    responded: bool
    result: Any = None


@dataclass
class _Proc:
    pid: int
    program: Program
    request: Invoke | None = None
    op: Generator[Prim, Any, Any] | None = None
    prim: Prim | None = None
    op_id: int | None = None
    steps: int = 0
    crashed: bool = False
    done: bool = False
    result: Any = None
    # Every primitive return value received so far.  Together with the
    # program, this determines the process's whole local state.
    received: list[Any] = field(default_factory=list)


class Executor:
    """Runs a workload one primitive step at a time."""

    def __init__(self, workload: Workload) -> None:
        self.workload = workload
        self.memory = Memory(workload.width)
        self.registers: dict[str, AuditableRegister] = {
            name: make_register(name, cfg, self.memory) for name, cfg in workload.registers.items()
        }
        self.events: list[Event] = []
        self._next_op = 0
        self.procs: dict[int, _Proc] = {}
        for pid in workload.programs:
            proc = _Proc(pid, workload.program(pid))
            self._advance(proc, None, first=True)
            self.procs[pid] = proc

    def _advance(self, proc: _Proc, value: Any, first: bool = False) -> None:
        try:
            proc.request = next(proc.program) if first else proc.program.send(value)
        except StopIteration as stop:
            proc.request = None
            proc.done = True
            proc.result = stop.value

    def enabled(self) -> list[int]:
        return [pid for pid, p in self.procs.items() if not p.crashed and not p.done]

    @property
    def total_steps(self) -> int:
        return sum(p.steps for p in self.procs.values())

    def _record(self, proc: _Proc, phase: Phase, req: Invoke, result: Any = None) -> None:
        self.events.append(
            Event(len(self.events), proc.pid, req.obj, proc.op_id, phase, req.kind, req.argument, result)
        )

    def step(self, pid: int) -> StepOutcome:
        """Apply exactly one primitive of ``pid``, invoking its next
        operation first if it is between operations."""
        proc = self.procs.get(pid)
        if proc is None or proc.crashed or proc.done:
            raise ScheduleError(f"process {pid} cannot take a step")
        req = proc.request
        if proc.op is None:
            proc.op_id = self._next_op
            self._next_op += 1
            proc.op = self.registers[req.obj].operation(pid, req.kind, req.argument)
            self._record(proc, Phase.INVOKE, req)
            try:
                proc.prim = next(proc.op)
            except StopIteration as stop:
                # An operation with no primitive still takes one slot.
                proc.steps += 1
                return self._respond(proc, req, stop.value)
        ret = self.memory.apply(proc.prim, pid, proc.op_id)
        proc.steps += 1
        proc.received.append(ret)
        try:
            proc.prim = proc.op.send(ret)
        except StopIteration as stop:
            return self._respond(proc, req, stop.value)
        return StepOutcome(False)

    def _respond(self, proc: _Proc, req: Invoke, result: Any) -> StepOutcome:
        self._record(proc, Phase.RESPOND, req, result)
        proc.op = proc.prim = None
        self._advance(proc, result)
        return StepOutcome(True, result)

    def crash(self, pid: int) -> None:
        proc = self.procs.get(pid)
        if proc is None or proc.crashed or proc.done:
            raise ScheduleError(f"process {pid} cannot crash")
        proc.crashed = True

    def state_key(self) -> tuple:
        """Hashable summary that determines every continuation of this run."""
        cells = tuple(
            sorted((name, c.contents) for name, c in self.memory.cells.items() if c.contents != c.initial)
        )
        procs = tuple(
            (pid, p.crashed, p.steps, tuple(p.received)) for pid, p in self.procs.items()
        )
        return tuple(self.events), cells, procs

    def history(self) -> History:
        roles = {name: cfg.roles() for name, cfg in self.workload.registers.items()}
        return History(tuple(self.events), roles)


@dataclass(frozen=True)
class Schedule:
    """Who takes each step, plus crash points ``(process, k)``: the process
    crashes once it has taken ``k`` steps."""

    order: tuple[int, ...]
    crashes: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_actions(cls, actions: Sequence[Action]) -> Schedule:
        order: list[int] = []
        crashes = []
        counts: dict[int, int] = {}
        for a in actions:
            if isinstance(a, Crash):
                crashes.append((a.process, counts.get(a.process, 0)))
            else:
                order.append(a)
                counts[a] = counts.get(a, 0) + 1
        return cls(tuple(order), tuple(crashes))


@dataclass
class Run:
    schedule: Schedule
    history: History
    executor: Executor = field(repr=False)

    @property
    def results(self) -> dict[int, Any]:
        return {pid: p.result for pid, p in self.executor.procs.items() if p.done}

    @property
    def crashed(self) -> set[int]:
        return {pid for pid, p in self.executor.procs.items() if p.crashed}

    @property
    def steps(self) -> dict[int, int]:
        return {pid: p.steps for pid, p in self.executor.procs.items()}


def run(workload: Workload, schedule: Schedule | Sequence[int]) -> Run:
    """Drive ``workload`` through ``schedule``.  The schedule need not be
    maximal; unfinished processes leave pending operations."""
    if not isinstance(schedule, Schedule):
        schedule = Schedule(tuple(schedule))
    ex = Executor(workload)
    pending = dict(schedule.crashes)
    if len(pending) != len(schedule.crashes):
        raise ScheduleError("a process can crash only once")

    def apply_crashes() -> None:
        for pid, k in list(pending.items()):
            proc = ex.procs.get(pid)
            if proc is None:
                raise ScheduleError(f"crash of unknown process {pid}")
            if proc.steps == k:
                del pending[pid]
                if not proc.done:
                    proc.crashed = True

    apply_crashes()
    for pid in schedule.order:
        ex.step(pid)
        apply_crashes()
    return Run(schedule, ex.history(), ex)


def _options(
    ex: Executor, last: Action | None, crashes: int, max_crashes: int, canonical: bool = True
) -> list[Action]:
    enabled = ex.enabled()
    opts: list[Action] = list(enabled)
    if crashes < max_crashes:
        for pid in enabled:
            proc = ex.procs[pid]
            # One canonical crash position per truncation point: right after
            # the process's own step, or before anything else for zero steps.
            if not canonical or last == pid or (proc.steps == 0 and _only_earlier_crashes(ex, pid)):
                opts.append(Crash(pid))
    return opts


def _only_earlier_crashes(ex: Executor, pid: int) -> bool:
    return ex.total_steps == 0 and all(
        q < pid for q, p in ex.procs.items() if p.crashed
    )


def _apply(ex: Executor, action: Action) -> None:
    if isinstance(action, Crash):
        ex.crash(action.process)
    else:
        ex.step(action)


def _replay(workload: Workload, actions: Sequence[Action]) -> Executor:
    ex = Executor(workload)
    for a in actions:
        _apply(ex, a)
    return ex


def explore_exhaustive(
    workload: Workload,
    step_bound: int = 64,
    max_crashes: int = 0,
    reduce: bool = False,
    preemption_bound: int | None = None,
) -> Iterator[Run]:
    """Yield one run per distinct maximal interleaving.

    ``max_crashes`` processes may additionally be crashed at any of their
    step boundaries.  Raises :class:`ExplorationBoundError` as soon as an
    execution takes more than ``step_bound`` steps.

    With ``reduce``, a prefix whose :meth:`Executor.state_key` was already
    visited is pruned.  Equal keys have equal sets of continuations, so every
    distinct history is still produced.  Runs repeating an already produced
    history are skipped, so each history appears exactly once.

    ``preemption_bound`` keeps only schedules that switch away from a
    still-enabled process at most that many times.
    """
    seen: set[tuple] = set()
    yielded: set[tuple] = set()
    actions: list[Action] = []

    def visit(ex: Executor, crashes: int, preemptions: int) -> Iterator[Run]:
        if ex.total_steps > step_bound:
            raise ExplorationBoundError(
                f"execution exceeded {step_bound} steps; raise the bound or shrink the workload"
            )
        last = actions[-1] if actions else None
        opts = _options(ex, last, crashes, max_crashes, canonical=not reduce)
        running = last if isinstance(last, int) and last in opts else None
        if not opts:
            if reduce:
                events = tuple(ex.events)
                if events in yielded:
                    return
                yielded.add(events)
            yield Run(Schedule.from_actions(actions), ex.history(), ex)
            return
        if preemption_bound is not None and preemptions >= preemption_bound and running is not None:
            opts = [a for a in opts if a == running or isinstance(a, Crash)]
        for i, action in enumerate(opts):
            used = preemptions + (running is not None and isinstance(action, int) and action != running)
            # The first child reuses this executor; later ones replay.
            child = ex if i == 0 else _replay(workload, actions)
            _apply(child, action)
            if reduce:
                key = child.state_key()
                if preemption_bound is not None:
                    key = (key, action, used)
                if key in seen:
                    continue
                seen.add(key)
            actions.append(action)
            yield from visit(child, crashes + isinstance(action, Crash), used)
            actions.pop()

    yield from visit(Executor(workload), 0, 0)


def explore_random(
    workload: Workload,
    seed: int,
    count: int,
    crash_prob: float = 0.0,
    max_crashes: int = 0,
    step_bound: int = 10_000,
) -> Iterator[Run]:
    """Yield ``count`` runs with uniformly random scheduling choices.

    With ``crash_prob`` > 0, each choice crashes the picked process instead
    of stepping it with that probability, up to ``max_crashes`` per run.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    for _ in range(count):
        ex = Executor(workload)
        actions: list[Action] = []
        crashes = 0
        while True:
            enabled = ex.enabled()
            if not enabled:
                break
            pid = rng.choice(enabled)
            action: Action = pid
            if crashes < max_crashes and crash_prob and rng.random() < crash_prob:
                action = Crash(pid)
                crashes += 1
            _apply(ex, action)
            actions.append(action)
            if ex.total_steps > step_bound:
                raise ExplorationBoundError(f"execution exceeded {step_bound} steps")
        yield Run(Schedule.from_actions(actions), ex.history(), ex)


# -- workload description files -----------------------------------------------
#
#   register R a4 init=7 writer=0 readers=1,2 auditors=0
#   process 0: write 1; audit; write 2
#   process 1: read; read
#
# The object name may be omitted from an operation when there is one register.

_REGISTER = re.compile(r"^register\s+(\S+)\s+(\S+)\s*(.*)$")
_PROCESS = re.compile(r"^process\s+(\d+)\s*:\s*(.*)$")


def parse_workload(text: str) -> Workload:
    registers: dict[str, RegisterConfig] = {}
    scripts: dict[int, list[tuple[int, list[str]]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _REGISTER.match(line):
            name, algorithm, rest = m.groups()
            attrs = dict(item.split("=", 1) for item in rest.split())
            try:
                registers[name] = RegisterConfig(
                    algorithm=algorithm,
                    writer=int(attrs["writer"]),
                    readers=tuple(int(x) for x in attrs["readers"].split(",")),
                    auditors=tuple(int(x) for x in attrs.get("auditors", attrs["writer"]).split(",")),
                    initial=parse_value(attrs.get("init", "_|_")),
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"line {lineno}: bad register declaration ({exc})") from None
        elif m := _PROCESS.match(line):
            ops = [op.split() for op in m.group(2).split(";") if op.strip()]
            scripts.setdefault(int(m.group(1)), []).extend((lineno, op) for op in ops)
        else:
            raise ValueError(f"line {lineno}: expected 'register' or 'process'")
    if not registers:
        raise ValueError("workload declares no register")
    default = next(iter(registers)) if len(registers) == 1 else None
    programs: dict[int, list[Invoke]] = {}
    for pid, ops in scripts.items():
        prog = programs.setdefault(pid, [])
        for lineno, words in ops:
            prog.append(_parse_op(lineno, words, registers, default))
    return Workload(registers, programs)


def _parse_op(lineno: int, words: list[str], registers: Mapping[str, Any], default: str | None) -> Invoke:
    try:
        kind = Kind(words[0])
    except ValueError:
        raise ValueError(f"line {lineno}: unknown operation {words[0]!r}") from None
    args = words[1:]
    if args and args[0] in registers:
        obj, args = args[0], args[1:]
    elif default is not None:
        obj = default
    else:
        raise ValueError(f"line {lineno}: operation must name its register")
    if kind is Kind.WRITE:
        if len(args) != 1:
            raise ValueError(f"line {lineno}: write takes one value")
        value = parse_value(args[0])
        if value is BOTTOM:
            raise ValueError(f"line {lineno}: cannot write BOTTOM")
        return Invoke(obj, kind, value)
    if args:
        raise ValueError(f"line {lineno}: {kind.value} takes no argument")
    return Invoke(obj, kind)
