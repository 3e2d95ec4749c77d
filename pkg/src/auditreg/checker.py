"""Decide atomicity with atomic audit and atomicity with regular audit.

The main checkers run a depth-first search over linearization prefixes,
memoizing failed frontier states ``(linearized ops, register value, read
flags)``.  Pending reads and writes are optional in the search, which folds
the choice of completion into the linearization itself; pending audits are
never completed.

:func:`brute_force_oracle` decides the same questions by enumerating every
completion and every permutation and is only meant for tiny histories.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .history import BOTTOM, Event, History, HistoryError, Kind, OpRecord, Phase, completions

__all__ = [
    "InputError",
    "OracleBoundError",
    "Reason",
    "Verdict",
    "Violation",
    "apply_completion",
    "brute_force_oracle",
    "check",
    "check_atomic_with_atomic_audit",
    "check_atomic_with_regular_audit",
    "check_audit_conditions",
    "check_sequential_register",
]


class InputError(ValueError):
    """The history is outside the checker's domain."""


class OracleBoundError(ValueError):
    pass


class Reason(str, enum.Enum):
    REGISTER = "register-semantics"
    COMPLETENESS = "completeness"
    STRONG_ACCURACY = "strong-accuracy"
    ACCURACY = "accuracy"
    NO_LINEARIZATION = "no-linearization"


@dataclass(frozen=True)
class Violation:
    reason: Reason
    definition: int
    obj: str | None = None
    op_ids: tuple[int, ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        where = f" on {self.obj}" if self.obj else ""
        ops = f" ops {list(self.op_ids)}" if self.op_ids else ""
        tail = f": {self.detail}" if self.detail else ""
        return f"definition {self.definition} {self.reason.value}{where}{ops}{tail}"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    witness: tuple[int, ...] | None = None
    violation: Violation | None = None
    # Pending operations kept in the chosen completion, with their response.
    completion: Mapping[int, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.accepted and self.witness is None:
            raise ValueError("accepted verdict needs a witness")
        if not self.accepted and self.violation is None:
            raise ValueError("rejected verdict needs a violation")

    def __bool__(self) -> bool:
        return self.accepted

    def to_record(self) -> str:
        if self.accepted:
            wit = ",".join(map(str, self.witness)) or "-"
            return f"accepted\twitness={wit}"
        v = self.violation
        ops = ",".join(map(str, v.op_ids)) or "-"
        return f"rejected\treason={v.reason.value}\tobject={v.obj or '-'}\tops={ops}\t{v.detail}"


# -- sequential predicates ----------------------------------------------------


def check_sequential_register(seq: Sequence[int], h: History) -> bool:
    """Every read in ``seq`` returns the latest preceding write, else the
    initial value.  Audits are ignored."""
    ops = h.operations()
    value: dict[str, Any] = {}
    for op_id in seq:
        op = ops[op_id]
        current = value.get(op.obj, h.initial(op.obj))
        if op.kind is Kind.WRITE:
            value[op.obj] = op.argument
        elif op.kind is Kind.READ and (not op.complete or op.result != current):
            return False
    return True


def check_audit_conditions(seq: Sequence[int], h: History) -> bool:
    """Every audit in ``seq`` returns exactly the (process, value) pairs of
    the reads placed before it."""
    ops = h.operations()
    seen: dict[str, set[tuple[int, Any]]] = {}
    for op_id in seq:
        op = ops[op_id]
        flags = seen.setdefault(op.obj, set())
        if op.kind is Kind.READ:
            flags.add((op.process, op.result))
        elif op.kind is Kind.AUDIT and (not op.complete or set(op.result) != flags):
            return False
    return True


def apply_completion(h: History, completion: Mapping[int, Any]) -> History:
    """The member of complete(h) that keeps exactly the pending operations in
    ``completion`` with the given responses."""
    ops = h.operations()
    pending = {op.op_id for op in ops.values() if not op.complete}
    events = [ev for ev in h.events if ev.op_id not in pending or ev.op_id in completion]
    seq = h.events[-1].seq if h.events else -1
    for op_id in sorted(completion):
        op = ops[op_id]
        seq += 1
        events.append(
            Event(seq, op.process, op.obj, op_id, Phase.RESPOND, op.kind, op.argument, completion[op_id])
        )
    return History(tuple(events), h.roles)


# -- search -------------------------------------------------------------------


class _Problem:
    """One object's operations, indexed for bitmask search."""

    def __init__(self, h: History, obj: str, include_audits: bool) -> None:
        self.obj = obj
        self.initial = h.initial(obj)
        all_ops = sorted(h.for_object(obj).operations().values(), key=lambda o: o.op_id)
        self.ops: list[OpRecord] = [
            o for o in all_ops if not (o.kind is Kind.AUDIT and (not o.complete or not include_audits))
        ]
        self.pred = []
        for a in self.ops:
            mask = 0
            for j, b in enumerate(self.ops):
                if b.complete and b.respond < a.invoke:
                    mask |= 1 << j
            self.pred.append(mask)
        self.complete_mask = sum(1 << i for i, o in enumerate(self.ops) if o.complete)

    def index(self, op_id: int) -> int:
        for i, o in enumerate(self.ops):
            if o.op_id == op_id:
                return i
        raise KeyError(op_id)


class _Mode(enum.Enum):
    FULL = "full"
    IGNORE = "ignore"
    COMPLETENESS_ONLY = "completeness-only"


def _audit_ok(result: frozenset, flags: frozenset, mode: _Mode) -> bool:
    if mode is _Mode.FULL:
        return result == flags
    if mode is _Mode.COMPLETENESS_ONLY:
        return flags <= result
    return True


@dataclass
class _Outcome:
    trail: list[tuple[int, Any]] | None
    depth: int = -1
    blocked: set[int] = field(default_factory=set)


def _search(
    prob: _Problem,
    required: int,
    mode: _Mode = _Mode.FULL,
    forced: Mapping[int, Any] | None = None,
) -> _Outcome:
    forced = forced or {}
    ops, pred = prob.ops, prob.pred
    failed: set[tuple[int, Any, frozenset]] = set()
    trail: list[tuple[int, Any]] = []
    out = _Outcome(None)

    def blocked(i: int, depth: int) -> None:
        if depth > out.depth:
            out.depth, out.blocked = depth, {i}
        elif depth == out.depth:
            out.blocked.add(i)

    def dfs(done: int, value: Any, flags: frozenset, depth: int) -> bool:
        if done & required == required:
            return True
        key = (done, value, flags)
        if key in failed:
            return False
        for i, op in enumerate(ops):
            bit = 1 << i
            if done & bit or pred[i] & ~done:
                continue
            new_value, new_flags, response = value, flags, None
            if op.kind is Kind.WRITE:
                new_value = op.argument
            elif op.kind is Kind.READ:
                if op.complete and op.result != value:
                    blocked(i, depth)
                    continue
                if i in forced and forced[i] != value:
                    continue
                new_flags = flags | {(op.process, value)}
                response = value
            elif not _audit_ok(op.result, flags, mode):
                blocked(i, depth)
                continue
            trail.append((i, response))
            if dfs(done | bit, new_value, new_flags, depth + 1):
                return True
            trail.pop()
        failed.add(key)
        return False

    if dfs(0, prob.initial, frozenset(), 0):
        out.trail = list(trail)
    return out


def _prepare(h: History) -> list[str]:
    try:
        h.validate()
    except HistoryError as exc:
        raise InputError(str(exc)) from None
    objs = h.objects()
    for obj in objs:
        written = h.written_values(obj)
        if BOTTOM in written:
            raise InputError(f"{obj}: BOTTOM written")
        if len(written) != len(set(written)):
            raise InputError(f"{obj}: written values are not pairwise distinct")
        if h.initial(obj) in written:
            raise InputError(f"{obj}: initial value written again")
    return objs


def _witness(prob: _Problem, trail: list[tuple[int, Any]]) -> tuple[tuple[int, ...], dict[int, Any]]:
    ids = tuple(prob.ops[i].op_id for i, _ in trail)
    completion = {prob.ops[i].op_id: r for i, r in trail if not prob.ops[i].complete}
    return ids, completion


def _combine(parts: Iterable[Verdict]) -> Verdict:
    witness: list[int] = []
    completion: dict[int, Any] = {}
    for v in parts:
        if not v.accepted:
            return v
        witness.extend(v.witness)
        completion.update(v.completion)
    return Verdict(True, tuple(witness), completion=completion)


def _op_ids(prob: _Problem, idx: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(prob.ops[i].op_id for i in idx))


def check_atomic_with_atomic_audit(h: History) -> Verdict:
    """Is there a completion and one sequential order of all its reads,
    writes and audits that respects real time, register semantics, and has
    every audit report exactly the reads ordered before it?"""
    return _combine(_check_atomic_object(h, obj) for obj in _prepare(h))


def _check_atomic_object(h: History, obj: str) -> Verdict:
    prob = _Problem(h, obj, include_audits=True)
    out = _search(prob, prob.complete_mask)
    if out.trail is not None:
        ids, completion = _witness(prob, out.trail)
        return Verdict(True, ids, completion=completion)
    # Diagnose by relaxing the audit predicate.
    if _search(prob, prob.complete_mask, _Mode.IGNORE).trail is None:
        reason, ops = Reason.REGISTER, out.blocked
        detail = "no order of reads and writes returns the observed values"
    elif _search(prob, prob.complete_mask, _Mode.COMPLETENESS_ONLY).trail is not None:
        reason, ops = Reason.STRONG_ACCURACY, _audits(prob, out.blocked)
        detail = "an audit reports a read that cannot be ordered before it"
    else:
        reason, ops = Reason.COMPLETENESS, _audits(prob, out.blocked)
        detail = "an audit misses a read that must be ordered before it"
    return Verdict(False, violation=Violation(reason, 1, obj, _op_ids(prob, ops), detail))


def _audits(prob: _Problem, idx: set[int]) -> set[int]:
    audits = {i for i in idx if prob.ops[i].kind is Kind.AUDIT}
    return audits or idx


def check_atomic_with_regular_audit(h: History) -> Verdict:
    """Reads and writes must be atomic; each audit must report every read
    that completed before it was invoked and only reads invoked before it
    responded."""
    return _combine(_check_regular_object(h, obj) for obj in _prepare(h))


def _check_regular_object(h: History, obj: str) -> Verdict:
    ops = sorted(h.for_object(obj).operations().values(), key=lambda o: o.op_id)
    reads = [o for o in ops if o.kind is Kind.READ]
    done_reads = [r for r in reads if r.complete]
    pending_read = {r.process: r for r in reads if not r.complete}
    forced: dict[int, Any] = {}

    def reject(reason: Reason, ids: Iterable[int], detail: str) -> Verdict:
        return Verdict(False, violation=Violation(reason, 2, obj, tuple(sorted(ids)), detail))

    for a in ops:
        if a.kind is not Kind.AUDIT or not a.complete:
            continue
        for r in done_reads:
            if r.respond < a.invoke and (r.process, r.result) not in a.result:
                return reject(
                    Reason.COMPLETENESS,
                    (a.op_id, r.op_id),
                    f"audit {a.op_id} misses ({r.process}, {r.result}) read before it began",
                )
        for p, v in sorted(a.result, key=_pair_sort):
            if any(r.process == p and r.result == v and r.invoke < a.respond for r in done_reads):
                continue
            r = pending_read.get(p)
            if r is not None and r.invoke < a.respond and forced.get(r.op_id, v) == v:
                forced[r.op_id] = v
                continue
            return reject(
                Reason.ACCURACY,
                (a.op_id,),
                f"audit {a.op_id} reports ({p}, {v}) but no such read was invoked before it returned",
            )

    prob = _Problem(h, obj, include_audits=False)
    forced_idx = {prob.index(op_id): v for op_id, v in forced.items()}
    required = prob.complete_mask | sum(1 << i for i in forced_idx)
    out = _search(prob, required, forced=forced_idx)
    if out.trail is not None:
        ids, completion = _witness(prob, out.trail)
        return Verdict(True, ids, completion=completion)
    if forced and _search(prob, prob.complete_mask).trail is not None:
        return reject(
            Reason.ACCURACY,
            forced,
            "pending reads cannot return the values audits attribute to them",
        )
    return reject(Reason.REGISTER, _op_ids(prob, out.blocked), "reads and writes are not atomic")


def _pair_sort(pair: tuple[int, Any]) -> tuple[int, int, Any]:
    p, v = pair
    return (p, 0, 0) if v is BOTTOM else (p, 1, v)


def check(h: History, definition: int) -> Verdict:
    if definition == 1:
        return check_atomic_with_atomic_audit(h)
    if definition == 2:
        return check_atomic_with_regular_audit(h)
    raise ValueError(f"definition must be 1 or 2, got {definition}")


# -- brute force oracle -------------------------------------------------------


def brute_force_oracle(h: History, definition: int, bound: int = 8) -> Verdict:
    """Enumerate every completion and every permutation, applying the
    definitions literally.  Refuses histories with more than ``bound``
    operations that could survive completion."""
    if definition not in (1, 2):
        raise ValueError(f"definition must be 1 or 2, got {definition}")
    objs = _prepare(h)
    size = sum(1 for o in h.operations().values() if o.complete or o.kind is not Kind.AUDIT)
    if size > bound:
        raise OracleBoundError(f"{size} operations exceed the oracle bound {bound}")
    witness: list[int] = []
    for obj in objs:
        found = _oracle_object(h.for_object(obj), definition)
        if found is None:
            return Verdict(
                False,
                violation=Violation(Reason.NO_LINEARIZATION, definition, obj, (), "exhaustive search failed"),
            )
        witness.extend(found)
    return Verdict(True, tuple(witness))


def _oracle_object(h: History, definition: int) -> tuple[int, ...] | None:
    original = h.operations()
    initial = h.initial(h.objects()[0]) if h.objects() else BOTTOM
    for hp in completions(h):
        ops = list(hp.operations().values())
        if definition == 1:
            candidates = ops
        else:
            if not _regular_audits_hold(ops):
                continue
            candidates = [o for o in ops if o.kind is not Kind.AUDIT]
        for perm in itertools.permutations(candidates):
            if not _respects_real_time(perm, original):
                continue
            if not _register_holds(perm, initial):
                continue
            if definition == 1 and not _atomic_audits_hold(perm):
                continue
            return tuple(o.op_id for o in perm)
    return None


def _respects_real_time(perm: Sequence[OpRecord], original: Mapping[int, OpRecord]) -> bool:
    position = {o.op_id: i for i, o in enumerate(perm)}
    for a in perm:
        ra = original[a.op_id].respond
        if ra is None:
            continue
        for b in perm:
            if ra < original[b.op_id].invoke and position[a.op_id] > position[b.op_id]:
                return False
    return True


def _register_holds(perm: Sequence[OpRecord], initial: Any) -> bool:
    for i, op in enumerate(perm):
        if op.kind is not Kind.READ:
            continue
        latest = initial
        for prior in perm[:i]:
            if prior.kind is Kind.WRITE:
                latest = prior.argument
        if op.result != latest:
            return False
    return True


def _atomic_audits_hold(perm: Sequence[OpRecord]) -> bool:
    for i, op in enumerate(perm):
        if op.kind is not Kind.AUDIT:
            continue
        before = [r for r in perm[:i] if r.kind is Kind.READ]
        # Completeness
        for r in before:
            if (r.process, r.result) not in op.result:
                return False
        # Strong accuracy
        for p, v in op.result:
            if not any(r.process == p and r.result == v for r in before):
                return False
    return True


def _regular_audits_hold(ops: Sequence[OpRecord]) -> bool:
    reads = [o for o in ops if o.kind is Kind.READ]
    for a in ops:
        if a.kind is not Kind.AUDIT:
            continue
        # Completeness
        for r in reads:
            if r.respond < a.invoke and (r.process, r.result) not in a.result:
                return False
        # Accuracy
        for p, v in a.result:
            if not any(r.process == p and r.result == v and r.invoke < a.respond for r in reads):
                return False
    return True
