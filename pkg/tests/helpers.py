"""Builders shared by the test modules."""

from __future__ import annotations

import random
from typing import Any

from auditreg.history import BOTTOM, Event, History, Kind, Phase, Roles
from auditreg.memory import Memory
from auditreg.registers import RegisterConfig, make_register
from auditreg.scheduler import Invoke, Workload

W, R, A = Kind.WRITE, Kind.READ, Kind.AUDIT


def script(text: str, obj: str = "R") -> list[Invoke]:
    """``"W1 A R"`` -> write 1, audit, read."""
    ops = []
    for tok in text.split():
        if tok[0] == "W":
            ops.append(Invoke(obj, W, int(tok[1:])))
        elif tok == "R":
            ops.append(Invoke(obj, R))
        elif tok == "A":
            ops.append(Invoke(obj, A))
        else:
            raise ValueError(tok)
    return ops


def workload(alg: str, programs: dict[int, str], readers, auditors, writer=0, init=BOTTOM) -> Workload:
    cfg = RegisterConfig(alg, writer, tuple(readers), tuple(auditors), init)
    return Workload({"R": cfg}, {p: script(t) for p, t in programs.items()})


class Solo:
    """Drive one register sequentially, one whole operation at a time."""

    def __init__(self, alg: str, readers, auditors, writer=0, init=BOTTOM) -> None:
        self.memory = Memory()
        self.reg = make_register("R", RegisterConfig(alg, writer, tuple(readers), tuple(auditors), init), self.memory)
        self.steps: list[int] = []

    def op(self, process: int, kind: Kind, arg: Any = None) -> Any:
        gen = self.reg.operation(process, kind, arg)
        steps = 0
        try:
            prim = next(gen)
            while True:
                steps += 1
                prim = gen.send(self.memory.apply(prim, process))
        except StopIteration as stop:
            self.steps.append(steps)
            return stop.value

    def write(self, p: int, v: Any) -> None:
        self.op(p, W, v)

    def read(self, p: int) -> Any:
        return self.op(p, R)

    def audit(self, p: int) -> frozenset:
        return self.op(p, A)


class HB:
    """History builder: ``h = HB(); w = h.inv(0, W, 1); h.res(w)``."""

    def __init__(self, writer=0, readers=(1, 2), auditors=(0, 2), init=BOTTOM, obj="R") -> None:
        self.obj = obj
        self.roles = {obj: Roles(writer, frozenset(readers), frozenset(auditors), init)}
        self.events: list[Event] = []
        self.open: dict[int, Event] = {}
        self.next_op = 0

    def inv(self, process: int, kind: Kind, arg: Any = None) -> int:
        op = self.next_op
        self.next_op += 1
        ev = Event(len(self.events), process, self.obj, op, Phase.INVOKE, kind, arg)
        self.events.append(ev)
        self.open[op] = ev
        return op

    def res(self, op: int, result: Any = None) -> int:
        ev = self.open.pop(op)
        self.events.append(
            Event(len(self.events), ev.process, self.obj, op, Phase.RESPOND, ev.kind, ev.argument, result)
        )
        return op

    def seq(self, process: int, kind: Kind, arg: Any = None, result: Any = None) -> int:
        return self.res(self.inv(process, kind, arg), result)

    def build(self) -> History:
        return History(tuple(self.events), self.roles)


def random_history(rng: random.Random, max_ops: int = 8) -> History:
    """Random well-formed single-register history.

    Writer 0 writes distinct values and audits; 1 reads; 2 reads and audits.
    Read results come from values written so far, audit results from pairs
    of reads invoked so far, so both accepted and rejected histories occur.
    """
    hb = HB()
    n_ops = rng.randint(0, max_ops)
    menu = {0: [W, A], 1: [R], 2: [R, A]}
    running: dict[int, int] = {}
    invoked = 0
    next_value = 1
    written = [BOTTOM]
    reads: list[tuple[int, Any]] = []
    stop_pending = rng.random() < 0.5
    while invoked < n_ops or running:
        idle = [p for p in menu if p not in running]
        can_invoke = invoked < n_ops and idle
        if running and (not can_invoke or rng.random() < 0.5):
            p = rng.choice(sorted(running))
            if stop_pending and invoked >= n_ops and rng.random() < 0.3:
                del running[p]  # leave pending
                continue
            op = running.pop(p)
            kind = hb.open[op].kind
            if kind is W:
                hb.res(op)
            elif kind is R:
                v = rng.choice(written[-2:] if rng.random() < 0.8 else written)
                reads.append((p, v))
                hb.res(op, v)
            else:
                pool = sorted(set(reads), key=repr)
                chosen = frozenset(x for x in pool if rng.random() < 0.8)
                if rng.random() < 0.1:
                    chosen |= {(1, rng.choice(written))}
                hb.res(op, chosen)
            continue
        p = rng.choice(idle)
        kind = rng.choice(menu[p])
        if kind is W:
            running[p] = hb.inv(p, W, next_value)
            written.append(next_value)
            next_value += 1
        else:
            running[p] = hb.inv(p, kind)
        invoked += 1
    return hb.build()


def naive_encode(n: int, with_sn: bool, v: int, sn: int, bits) -> int:
    """Set every bit position one at a time."""
    word = 0
    for i, b in enumerate(bits):
        if b:
            word += 2**i
    k = 0
    while v >> k or (with_sn and sn >> k):
        if with_sn:
            if (v >> k) & 1:
                word += 2 ** (n + 2 * k)
            if (sn >> k) & 1:
                word += 2 ** (n + 2 * k + 1)
        elif (v >> k) & 1:
            word += 2 ** (n + k)
        k += 1
    return word


def naive_decode(n: int, with_sn: bool, word: int) -> tuple[int, int, tuple[int, ...]]:
    """Read every bit position one at a time."""
    bits = tuple((word // 2**i) % 2 for i in range(n))
    v = sn = 0
    pos, k = n, 0
    while 2**pos <= word:
        if with_sn:
            v += ((word // 2**pos) % 2) * 2**k
            sn += ((word // 2 ** (pos + 1)) % 2) * 2**k
            pos += 2
        else:
            v += ((word // 2**pos) % 2) * 2**k
            pos += 1
        k += 1
    return v, sn, bits
