"""Atomic versus regular audits on one small history.

A read overlaps an audit.  An atomic audit (definition 1) must report the
read because the value it returned was overwritten before the audit began;
a regular audit (definition 2) may leave it out.  The second half finds such
a history by exploring the regular register.

Run: python3 demos/audit_semantics.py
"""

from __future__ import annotations

from auditreg import check, dumps
from auditreg.checker import Reason, brute_force_oracle
from auditreg.scheduler import explore_exhaustive
from auditreg.workloads import SEPARATION_AUDIT_EMPTY, separation_history, standard_workload

print("The canned history, audit returning the empty set:")
print(SEPARATION_AUDIT_EMPTY)
for reports in (True, False):
    h = separation_history(reports)
    label = "audit reports (1,1)" if reports else "audit reports nothing"
    for d in (1, 2):
        v = check(h, d)
        oracle = brute_force_oracle(h, d).accepted
        print(f"{label:<22} definition {d}: {v.to_record():<40} oracle agrees: {oracle == v.accepted}")
print()

print("Exploring the regular register's small workload for the same effect:")
runs = list(explore_exhaustive(standard_workload("a7"), 256, reduce=True))
split = [r for r in runs if not check(r.history, 1) and check(r.history, 2)]
missed = [r for r in split if check(r.history, 1).violation.reason is Reason.COMPLETENESS]
print(f"  {len(runs)} distinct histories, {len(split)} accepted by definition 2 only")
print(f"  {len(missed)} of them have an audit that misses an overlapping read")
if missed:
    r = missed[0]
    print(f"  first one, schedule {','.join(map(str, r.schedule.order))}:")
    print("  " + dumps(r.history).replace("\n", "\n  ").rstrip())
    print(f"  definition 1 says: {check(r.history, 1).violation}")
