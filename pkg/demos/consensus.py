"""Consensus from auditable registers.

Two processes agree using two single-reader registers: each writes its
proposal, reads the other, and audits its own register to learn whether
the other saw it.  For n processes each one keeps only the values nobody
read as empty, and decides their maximum.

Run: python3 demos/consensus.py
"""

from __future__ import annotations

from auditreg.consensus import ConsensusInstance, campaign, decisions
from auditreg.scheduler import Executor, run


def whole_ops(instance, turns):
    """Run complete operations in the given process order."""
    w = instance.workload()
    ex = Executor(w)
    order = []
    for pid in turns:
        while pid in ex.enabled():
            order.append(pid)
            if ex.step(pid).responded:
                break
    return decisions(run(w, order)).decisions


two = ConsensusInstance((3, 5))
print("two processes, inputs 3 and 5")
print("  p0 runs alone first:   ", whole_ops(two, [0, 0, 0, 1, 1, 1]))
print("  operations alternate:  ", whole_ops(two, [0, 1] * 3))
print("  every schedule:        ", campaign(two).summary())
print("  with one crash anywhere:", campaign(two, max_crashes=1).summary())
print()

three = ConsensusInstance((3, 5, 4), general=True)
print("three processes, inputs 3, 5, 4")
print("  sequential:            ", whole_ops(three, [p for p in range(3) for _ in range(9)]))
print("  up to 2 preemptions:   ", campaign(three, preemption_bound=2).summary())
print("  2000 random, crashes:  ", campaign(three, exhaustive=False, seed=3, count=2000, crash_prob=0.05, max_crashes=2).summary())
