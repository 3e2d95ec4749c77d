"""Standard workloads and canned histories shared by the CLI, tests and demos."""

from __future__ import annotations

from .history import History, loads
from .registers import ALGORITHMS, MUTANTS, base_algorithm
from .scheduler import Workload, parse_workload

__all__ = [
    "SEPARATION_AUDIT_EMPTY",
    "SEPARATION_AUDIT_READ",
    "definition_for",
    "separation_history",
    "generic_workload",
    "standard_workload",
    "workload_text",
]

# Small workloads are explored exhaustively, large ones (12 operations) by
# random schedules.  ``{alg}`` is replaced by the algorithm tag.
_STANDARD = {
    "a3": {
        "small": """
            register R {alg} writer=0 readers=1 auditors=0
            process 0: write 1; write 2; audit
            process 1: read; read; read
        """,
        "large": """
            register R {alg} writer=0 readers=1 auditors=0
            process 0: write 1; audit; write 2; audit; write 3; audit
            process 1: read; read; read; read; read; read
        """,
    },
    "a4": {
        "small": """
            register R {alg} writer=0 readers=1,2 auditors=0
            process 0: write 1; audit; write 2; audit
            process 1: read; read
            process 2: read
        """,
        "large": """
            register R {alg} writer=0 readers=1,2 auditors=0
            process 0: write 1; audit; write 2; audit; write 3; audit
            process 1: read; read; read
            process 2: read; read; read
        """,
    },
    "a5": {
        "small": """
            register R {alg} writer=0 readers=1 auditors=0,2
            process 0: write 1; write 2; audit
            process 1: read; read
            process 2: audit
        """,
        "large": """
            register R {alg} writer=0 readers=1 auditors=0,2
            process 0: write 1; write 2; audit; write 3; audit
            process 1: read; read; read; read
            process 2: audit; audit; audit
        """,
    },
    "a6": {
        "small": """
            register R {alg} writer=0 readers=1,2 auditors=0,2
            process 0: write 1; write 2
            process 1: read; read
            process 2: read; audit
        """,
        "large": """
            register R {alg} writer=0 readers=1,2 auditors=0,2
            process 0: write 1; write 2; audit; write 3
            process 1: read; read; read; read
            process 2: read; audit; read; audit
        """,
    },
    "a7": {
        "small": """
            register R {alg} writer=0 readers=1,2 auditors=0,2
            process 0: write 1; write 2; audit
            process 1: read; read
            process 2: read
        """,
        "large": """
            register R {alg} writer=0 readers=1,2 auditors=0,2
            process 0: write 1; write 2; audit; write 3
            process 1: read; read; read; read
            process 2: read; audit; read; audit
        """,
    },
}


def _known(algorithm: str) -> None:
    if algorithm not in ALGORITHMS and algorithm not in MUTANTS:
        raise ValueError(f"unknown algorithm {algorithm!r}")


def definition_for(algorithm: str) -> int:
    """Regular audit for a7, atomic audit for the rest."""
    _known(algorithm)
    return 2 if base_algorithm(algorithm) == "a7" else 1


def workload_text(algorithm: str, size: str = "small") -> str:
    _known(algorithm)
    if size not in ("small", "large"):
        raise ValueError(f"size must be small or large, got {size!r}")
    text = _STANDARD[base_algorithm(algorithm)][size].format(alg=algorithm)
    return "\n".join(line.strip() for line in text.strip().splitlines()) + "\n"


def standard_workload(algorithm: str, size: str = "small") -> Workload:
    return parse_workload(workload_text(algorithm, size))


def generic_workload(algorithm: str, readers: int, auditors: int) -> Workload:
    """Writer 0 writes twice then audits; readers ``1..readers`` read twice;
    ``auditors - 1`` further processes audit once."""
    _known(algorithm)
    if readers < 1 or auditors < 1:
        raise ValueError("need at least one reader and one auditor")
    reader_ids = list(range(1, readers + 1))
    extra = list(range(readers + 1, readers + auditors))
    lines = [
        f"register R {algorithm} writer=0 readers={','.join(map(str, reader_ids))} "
        f"auditors={','.join(map(str, [0, *extra]))}",
        "process 0: write 1; write 2; audit",
    ]
    lines += [f"process {p}: read; read" for p in reader_ids]
    lines += [f"process {p}: audit" for p in extra]
    return parse_workload("\n".join(lines))


# A read by p1 returning 1 overlaps an audit by p0, and write(2) completes
# before the audit starts.  An atomic audit must report (1, 1); a regular
# one may also return the empty set.
_SEPARATION = """\
#object\tR\tinit=_|_\twriter=0\treaders=1\tauditors=0
0\t0\tR\t0\tinvoke\twrite\t1\t-
1\t0\tR\t0\trespond\twrite\t1\t-
2\t1\tR\t1\tinvoke\tread\t-\t-
3\t0\tR\t2\tinvoke\twrite\t2\t-
4\t0\tR\t2\trespond\twrite\t2\t-
5\t0\tR\t3\tinvoke\taudit\t-\t-
6\t0\tR\t3\trespond\taudit\t-\t{audit}
7\t1\tR\t1\trespond\tread\t-\t1
"""

SEPARATION_AUDIT_READ = _SEPARATION.format(audit="{1:1}")
SEPARATION_AUDIT_EMPTY = _SEPARATION.format(audit="{}")


def separation_history(audit_reports_read: bool) -> History:
    return loads(SEPARATION_AUDIT_READ if audit_reports_read else SEPARATION_AUDIT_EMPTY)
