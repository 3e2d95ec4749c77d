"""Consensus from auditable registers.

``propose2`` solves consensus for two processes with two single-reader
registers audited by their writers.  ``propose_n`` solves it for ``n``
processes with ``n`` multi-reader, multi-auditor registers.  Both are
program factories for the scheduler: each ``yield`` requests one high-level
register operation.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

from .history import BOTTOM, Kind
from .registers import RegisterConfig
from .scheduler import Invoke, Program, Run, Workload, explore_exhaustive, explore_random

__all__ = [
    "ConsensusInstance",
    "ConsensusVerdict",
    "DecisionRecord",
    "Outcome",
    "Tally",
    "campaign",
    "decisions",
    "propose2",
    "propose_n",
    "verify_consensus",
]


class Outcome(str, enum.Enum):
    CRASHED = "CRASHED"
    UNDECIDED = "UNDECIDED"


def _reg(j: int) -> str:
    return f"R{j}"


def propose2(i: int, v: Any) -> Program:
    """Write, read the other register, audit my own, decide."""
    other = 1 - i
    yield Invoke(_reg(i), Kind.WRITE, v)
    val = yield Invoke(_reg(other), Kind.READ)
    audit_response = yield Invoke(_reg(i), Kind.AUDIT)
    if val is BOTTOM:
        return v
    if audit_response == {(other, BOTTOM)}:
        return val
    return max(v, val)


def propose_n(i: int, v: Any, n: int, observe: dict[int, frozenset] | None = None) -> Program:
    """Write, read every register, keep the values nobody read as BOTTOM,
    decide their maximum.  ``observe`` receives ``safe_values`` on return."""
    yield Invoke(_reg(i), Kind.WRITE, v)
    values = [BOTTOM] * n
    for j in range(n):
        values[j] = yield Invoke(_reg(j), Kind.READ)
    safe_values: set[Any] = set()
    for j in range(n):
        audit_response = yield Invoke(_reg(j), Kind.AUDIT)
        if not any(value is BOTTOM for _, value in audit_response):
            safe_values.add(values[j])
    if observe is not None:
        observe[i] = frozenset(safe_values)
    return max(safe_values)


@dataclass(frozen=True)
class ConsensusInstance:
    """``inputs[i]`` is the proposal of process ``i``.  Two processes with
    ``general=False`` run :func:`propose2`; otherwise :func:`propose_n`."""

    inputs: tuple[Any, ...]
    general: bool = False
    backend: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if any(v is BOTTOM or v is None for v in self.inputs):
            raise ValueError("inputs must not be BOTTOM")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("inputs must be pairwise distinct")
        if not self.general and self.n != 2:
            raise ValueError("the two-process algorithm needs exactly two inputs")
        if self.general and self.n < 1:
            raise ValueError("need at least one process")
        if self.backend is None:
            object.__setattr__(self, "backend", "a6" if self.general else "a5")
        if not self.general and self.backend not in ("a3", "a5"):
            raise ValueError("two-process consensus runs over a3 or a5")
        if self.general and self.backend != "a6":
            raise ValueError("n-process consensus runs over a6")

    @property
    def n(self) -> int:
        return len(self.inputs)

    def registers(self) -> dict[str, RegisterConfig]:
        if not self.general:
            return {
                _reg(i): RegisterConfig(self.backend, writer=i, readers=(1 - i,), auditors=(i,))
                for i in range(2)
            }
        everyone = tuple(range(self.n))
        return {
            _reg(i): RegisterConfig(self.backend, writer=i, readers=everyone, auditors=everyone)
            for i in range(self.n)
        }

    def workload(self, observe: dict[int, frozenset] | None = None) -> Workload:
        if self.general:
            programs = {
                i: (lambda i=i, v=v: propose_n(i, v, self.n, observe))
                for i, v in enumerate(self.inputs)
            }
        else:
            programs = {i: (lambda i=i, v=v: propose2(i, v)) for i, v in enumerate(self.inputs)}
        return Workload(self.registers(), programs)

    def step_bound(self) -> int:
        """Per-process primitive step bound for one propose."""
        if not self.general:
            # write + read + audit
            return 3 if self.backend == "a3" else 2 + 3 + 4
        n = self.n
        write = 1 + n * (2 + n)  # at most n failed cas, each followed by a read and n logs
        reads = 2 * n
        audits = n * (1 + n)  # every register is written once, so sn <= 1
        return write + reads + audits


@dataclass(frozen=True)
class DecisionRecord:
    decisions: Mapping[int, Any]
    steps: Mapping[int, int]

    @classmethod
    def from_run(cls, run: Run) -> DecisionRecord:
        out: dict[int, Any] = {}
        for pid, proc in run.executor.procs.items():
            if proc.crashed:
                out[pid] = Outcome.CRASHED
            elif proc.done:
                out[pid] = proc.result
            else:
                out[pid] = Outcome.UNDECIDED
        return cls(out, dict(run.steps))

    def decided(self) -> dict[int, Any]:
        return {p: v for p, v in self.decisions.items() if not isinstance(v, Outcome)}


def decisions(run: Run) -> DecisionRecord:
    return DecisionRecord.from_run(run)


@dataclass(frozen=True)
class ConsensusVerdict:
    agreement: bool
    validity: bool
    termination: bool
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.agreement and self.validity and self.termination


def verify_consensus(
    instance: ConsensusInstance, record: DecisionRecord, step_bound: int | None = None
) -> ConsensusVerdict:
    bound = instance.step_bound() if step_bound is None else step_bound
    decided = record.decided()
    values = set(decided.values())
    agreement = len(values) <= 1
    validity = values <= set(instance.inputs)
    termination = all(
        v is not Outcome.UNDECIDED and record.steps.get(p, 0) <= bound
        for p, v in record.decisions.items()
    )
    problems = []
    if not agreement:
        problems.append(f"disagreement {dict(sorted(decided.items()))}")
    if not validity:
        problems.append(f"decided {sorted(values - set(instance.inputs))} not proposed")
    if not termination:
        problems.append(f"steps {dict(record.steps)} against bound {bound}")
    return ConsensusVerdict(agreement, validity, termination, "; ".join(problems))


@dataclass
class Tally:
    runs: int = 0
    agreement: int = 0
    validity: int = 0
    termination: int = 0
    safe_values: int = 0
    first_failure: tuple[Run, str] | None = field(default=None, repr=False)

    @property
    def violations(self) -> int:
        return self.agreement + self.validity + self.termination + self.safe_values

    def summary(self) -> str:
        return (
            f"runs: {self.runs}  violations: {self.violations}  "
            f"(agreement {self.agreement}, validity {self.validity}, "
            f"termination {self.termination}, safe_values {self.safe_values})"
        )


def _safe_values_ok(observed: Mapping[int, frozenset]) -> bool:
    sets = set(observed.values())
    return len(sets) <= 1 and all(sets_ for sets_ in sets)


def campaign(
    instance: ConsensusInstance,
    *,
    exhaustive: bool = True,
    seed: int = 0,
    count: int = 1,
    max_crashes: int = 0,
    crash_prob: float = 0.0,
    step_bound: int = 10_000,
    preemption_bound: int | None = None,
) -> Tally:
    """Run ``instance`` over every schedule (or ``count`` random ones) and
    tally property violations."""
    observe: dict[int, frozenset] = {}
    workload = instance.workload(observe)
    runs: Iterator[Run]
    if exhaustive:
        runs = explore_exhaustive(
            workload, step_bound, max_crashes=max_crashes, reduce=True, preemption_bound=preemption_bound
        )
    else:
        runs = explore_random(workload, seed, count, crash_prob=crash_prob, max_crashes=max_crashes)
    tally = Tally()
    for r in runs:
        tally.runs += 1
        verdict = verify_consensus(instance, decisions(r))
        # Only the safe sets of processes that finished in this run count.
        finished = {p: s for p, s in observe.items() if p in r.results}
        problems = [verdict.detail] if not verdict.ok else []
        tally.agreement += not verdict.agreement
        tally.validity += not verdict.validity
        tally.termination += not verdict.termination
        if instance.general and not _safe_values_ok(finished):
            tally.safe_values += 1
            problems.append(f"safe_values differ {finished}")
        if problems and tally.first_failure is None:
            tally.first_failure = (r, "; ".join(problems))
        observe.clear()
    return tally
