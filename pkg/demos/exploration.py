"""Systematic schedule exploration with the checker in the loop.

Every correct register survives exhaustive exploration of its small
workload; every seeded mutant is caught, and the counterexample schedule
replays to the same history byte for byte.

Run: python3 demos/exploration.py
"""

from __future__ import annotations

import time

from auditreg import check, dumps
from auditreg.registers import MUTANTS
from auditreg.scheduler import explore_exhaustive, explore_random, run
from auditreg.workloads import definition_for, standard_workload

for alg in ("a3", "a4", "a6", "a7"):
    d = definition_for(alg)
    start = time.perf_counter()
    runs = list(explore_exhaustive(standard_workload(alg), 256, reduce=True))
    bad = sum(not check(r.history, d) for r in runs)
    print(f"{alg}: {len(runs):5d} distinct histories, {bad} rejected (definition {d}), {time.perf_counter() - start:.1f}s")

w = standard_workload("a5", "large")
runs = list(explore_random(w, seed=1, count=500, crash_prob=0.1, max_crashes=1))
bad = sum(not check(r.history, 1) for r in runs)
crashed = sum(bool(r.crashed) for r in runs)
print(f"a5 large: 500 random schedules ({crashed} with a crash), {bad} rejected")
print()

for name in MUTANTS:
    for r in explore_exhaustive(standard_workload(name), 256, reduce=True):
        v = check(r.history, 1)
        if not v:
            again = run(r.executor.workload, r.schedule)
            same = dumps(again.history) == dumps(r.history)
            print(f"{name}: {v.violation}")
            print(f"  schedule {','.join(map(str, r.schedule.order))}  replays identically: {same}")
            break
