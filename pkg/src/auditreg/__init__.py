"""Auditable registers, a deterministic schedule explorer and history checkers."""

from __future__ import annotations

from .checker import (
    Reason,
    Verdict,
    Violation,
    brute_force_oracle,
    check,
    check_atomic_with_atomic_audit,
    check_atomic_with_regular_audit,
)
from .history import BOTTOM, History, Kind, dumps, loads
from .registers import ALGORITHMS, MUTANTS, RegisterConfig, make_register
from .scheduler import Crash, Invoke, Schedule, Workload, explore_exhaustive, explore_random, run

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BOTTOM",
    "MUTANTS",
    "Crash",
    "History",
    "Invoke",
    "Kind",
    "Reason",
    "RegisterConfig",
    "Schedule",
    "Verdict",
    "Violation",
    "Workload",
    "brute_force_oracle",
    "check",
    "check_atomic_with_atomic_audit",
    "check_atomic_with_regular_audit",
    "dumps",
    "explore_exhaustive",
    "explore_random",
    "loads",
    "make_register",
    "run",
]
