"""Command line front end.

Exit codes: 0 success or accepted, 1 property violation, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Iterator, Sequence
from pathlib import Path

from .checker import InputError, brute_force_oracle, check
from .consensus import ConsensusInstance, campaign
from .history import HistoryError, ParseError, dumps, loads
from .memory import PrimitiveRecord
from .registers import ALGORITHMS, MUTANTS, RoleError
from .scheduler import (
    ExplorationBoundError,
    Run,
    Schedule,
    ScheduleError,
    Workload,
    explore_exhaustive,
    explore_random,
    parse_workload,
    run,
)
from .workloads import definition_for, generic_workload, standard_workload

__all__ = ["main"]

OK, VIOLATION, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _algorithm(tag: str) -> str:
    if tag not in ALGORITHMS and tag not in MUTANTS:
        known = ", ".join([*ALGORITHMS, *MUTANTS])
        raise UsageError(f"unknown algorithm {tag!r} (known: {known})")
    return tag


def _workload(args: argparse.Namespace) -> Workload:
    script = getattr(args, "script", None)
    if script and script not in ("demo", "standard"):
        path = Path(script)
        if not path.exists():
            raise UsageError(f"no such workload file: {script}")
        return parse_workload(path.read_text())
    algorithm = _algorithm(args.algorithm)
    if args.readers is not None or args.auditors is not None:
        return generic_workload(algorithm, args.readers or 1, args.auditors or 1)
    return standard_workload(algorithm, args.size)


def _algorithm_of(workload: Workload) -> str:
    return next(iter(workload.registers.values())).algorithm


def _print_run(r: Run, fmt: str, out) -> None:
    trace: Sequence[PrimitiveRecord] = r.executor.memory.trace if fmt == "records" else ()
    out.write(dumps(r.history, trace))


def cmd_run(args: argparse.Namespace) -> int:
    workload = _workload(args)
    if args.schedule is not None:
        try:
            order = tuple(int(x) for x in args.schedule.split(",") if x.strip())
        except ValueError:
            raise UsageError(f"bad schedule {args.schedule!r}") from None
        r = run(workload, Schedule(order))
    else:
        (r,) = explore_random(workload, args.seed, 1, step_bound=args.step_bound)
    _print_run(r, args.format, sys.stdout)
    return OK


def _runs(args: argparse.Namespace, workload: Workload) -> Iterator[Run]:
    if args.random:
        return explore_random(
            workload,
            args.seed,
            args.count,
            crash_prob=0.1 if args.crashes else 0.0,
            max_crashes=args.crashes,
            step_bound=args.step_bound,
        )
    return explore_exhaustive(
        workload,
        args.step_bound,
        max_crashes=args.crashes,
        reduce=True,
        preemption_bound=args.preemption_bound,
    )


def cmd_explore(args: argparse.Namespace) -> int:
    if args.max_schedules is not None and args.max_schedules < 1:
        raise UsageError("--max-schedules must be at least 1")
    if args.random and args.count < 1:
        raise UsageError("--count must be at least 1")
    workload = _workload(args)
    definition = args.definition or definition_for(_algorithm_of(workload))
    explored = 0
    for r in _runs(args, workload):
        explored += 1
        verdict = check(r.history, definition)
        if not verdict:
            print(f"explored: {explored}  rejected at schedule {explored}")
            print(f"violation: {verdict.violation}")
            print(f"schedule: {','.join(map(str, r.schedule.order))}")
            if r.schedule.crashes:
                print(f"crashes: {r.schedule.crashes}")
            sys.stdout.write(dumps(r.history))
            return VIOLATION
        if args.max_schedules is not None and explored >= args.max_schedules:
            break
    print(f"explored: {explored}  rejected: 0  definition: {definition}")
    return OK


def cmd_mutants(args: argparse.Namespace) -> int:
    survivors = []
    for name in args.names or MUTANTS:
        _algorithm(name)
        definition = definition_for(name)
        explored, verdict = 0, None
        for r in explore_exhaustive(standard_workload(name, args.size), args.step_bound, reduce=True):
            explored += 1
            verdict = check(r.history, definition)
            if not verdict:
                break
        if verdict is not None and not verdict:
            print(f"{name}: rejected after {explored} histories  reason: {verdict.violation.reason.value}")
        else:
            print(f"{name}: survived {explored} histories")
            survivors.append(name)
    return VIOLATION if survivors else OK


def cmd_check(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        text = sys.stdin.read() if args.file == "-" else path.read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    h = loads(text)
    verdict = brute_force_oracle(h, args.definition) if args.oracle else check(h, args.definition)
    print(verdict.to_record())
    return OK if verdict else VIOLATION


def _inputs(text: str | None, n: int) -> tuple[int, ...]:
    if text is None:
        return tuple(range(1, n + 1))
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad inputs {text!r}") from None


def cmd_consensus(args: argparse.Namespace) -> int:
    if args.n is not None and args.n < 1:
        raise UsageError("--n must be at least 1")
    n = 2 if args.two else args.n
    inputs = _inputs(args.inputs, n)
    if len(inputs) != n:
        raise UsageError(f"expected {n} inputs, got {len(inputs)}")
    try:
        instance = ConsensusInstance(inputs, general=not args.two, backend=args.backend)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    exhaustive = args.exhaustive or args.count is None
    bound = args.preemption_bound
    if exhaustive and bound is None and instance.general and instance.n > 2:
        bound = 2
    tally = campaign(
        instance,
        exhaustive=exhaustive,
        seed=args.seed,
        count=args.count or 1,
        max_crashes=args.crashes,
        crash_prob=0.1 if args.crashes else 0.0,
        preemption_bound=bound,
    )
    mode = f"random seed={args.seed}"
    if exhaustive:
        mode = "exhaustive" if bound is None else f"exhaustive preemption-bound={bound}"
    print(f"consensus n={instance.n} backend={instance.backend} inputs={','.join(map(str, inputs))} {mode}")
    print(tally.summary())
    if tally.first_failure is not None:
        r, why = tally.first_failure
        print(f"first violation: {why}")
        sys.stdout.write(dumps(r.history))
        return VIOLATION
    return OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", default="a3", help="a3..a7 or a built-in mutant")
    p.add_argument("--readers", type=int, help="generic workload with this many readers")
    p.add_argument("--auditors", type=int, help="generic workload with this many auditors")
    p.add_argument("--script", help="workload file, or 'demo' for the standard workload")
    p.add_argument("--size", choices=("small", "large"), default="small")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-bound", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="auditreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one workload under one schedule and print its history")
    _common(p)
    p.add_argument("--schedule", help="comma-separated process ids, one per step")
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explore", help="explore schedules and check every history")
    _common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="every interleaving (default)")
    mode.add_argument("--random", action="store_true", help="seeded random schedules")
    p.add_argument("--count", type=int, default=10_000, help="random schedules to run")
    p.add_argument("--max-schedules", type=int, help="stop after this many histories")
    p.add_argument("--crashes", type=int, default=0, help="processes that may crash per run")
    p.add_argument("--preemption-bound", type=int)
    p.add_argument("--definition", type=int, choices=(1, 2))
    p.set_defaults(func=cmd_explore, step_bound=256)

    p = sub.add_parser("mutants", help="check that every built-in mutant is caught")
    p.add_argument("names", nargs="*", help="mutants to run (default: all)")
    p.add_argument("--size", choices=("small", "large"), default="small")
    p.add_argument("--step-bound", type=int, default=256)
    p.set_defaults(func=cmd_mutants)

    p = sub.add_parser("check", help="check a history file")
    p.add_argument("file", help="history file, or - for stdin")
    p.add_argument("--definition", type=int, choices=(1, 2), default=1)
    p.add_argument("--oracle", action="store_true", help="use the brute force oracle")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("consensus", help="run a consensus campaign")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--two", action="store_true", help="two-process algorithm")
    who.add_argument("--n", type=int, help="n-process algorithm")
    p.add_argument("--inputs", help="comma-separated distinct proposals")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, help="random schedules (implies random mode)")
    p.add_argument("--crashes", type=int, default=0)
    p.add_argument("--preemption-bound", type=int)
    p.add_argument("--backend", help="register algorithm (a3 or a5 for --two)")
    p.set_defaults(func=cmd_consensus)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (
        UsageError,
        InputError,
        HistoryError,
        ScheduleError,
        ExplorationBoundError,
        RoleError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
