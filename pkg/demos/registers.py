"""Drive each auditable register by hand and watch what audits report.

Run: python3 demos/registers.py
"""

from __future__ import annotations

from auditreg import BOTTOM, Kind
from auditreg.memory import Memory
from auditreg.registers import ALGORITHMS, RegisterConfig, make_register


def op(memory, reg, process, kind, arg=None):
    """Run one operation to completion and return (result, primitive count)."""
    gen = reg.operation(process, kind, arg)
    steps = 0
    try:
        prim = next(gen)
        while True:
            steps += 1
            prim = gen.send(memory.apply(prim, process))
    except StopIteration as stop:
        return stop.value, steps


ROLES = {
    "a3": dict(readers=(1,), auditors=(0,)),
    "a4": dict(readers=(1, 2), auditors=(0,)),
    "a5": dict(readers=(1,), auditors=(0, 2)),
    "a6": dict(readers=(1, 2), auditors=(0, 2)),
    "a7": dict(readers=(1, 2), auditors=(0, 2)),
}

for alg, cls in ALGORITHMS.items():
    memory = Memory()
    roles = ROLES[alg]
    reg = make_register("R", RegisterConfig(alg, 0, roles["readers"], roles["auditors"]), memory)
    print(f"== {alg}: {cls.__name__}  readers={roles['readers']} auditors={roles['auditors']}")
    reader = roles["readers"][0]
    auditor = roles["auditors"][-1]
    script = [
        (reader, Kind.READ, None),
        (0, Kind.WRITE, 1),
        (reader, Kind.READ, None),
        (0, Kind.WRITE, 2),
        (auditor, Kind.AUDIT, None),
    ]
    for process, kind, arg in script:
        result, steps = op(memory, reg, process, kind, arg)
        shown = "" if kind is Kind.WRITE else f" -> {result!r}"
        label = f"{kind.value}({arg})" if arg is not None else kind.value
        print(f"  p{process} {label:<9}{shown}   [{steps} primitive(s)]")
    print(f"  audit saw every read: {set(result) == {(reader, BOTTOM), (reader, 1)}}")
    print(f"  shared cells: {', '.join(sorted(memory.cells))}")
    print()
