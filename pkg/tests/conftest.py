from __future__ import annotations

from contextlib import contextmanager

import pytest

# criterion number -> (title, passed, detail)
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def _line(n: int) -> str:
    title, ok, detail = ACCEPTANCE[n]
    return f"criterion {n:2d}  {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"


@pytest.fixture
def criterion():
    """``with criterion(3, "title") as note: ...; note.append("k=v")``"""

    @contextmanager
    def record(n: int, title: str):
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            first = str(exc).splitlines()[0] if str(exc) else ""
            ACCEPTANCE[n] = (title, False, "  ".join([*notes, f"{type(exc).__name__}: {first}"]))
            print(_line(n))
            raise
        ACCEPTANCE[n] = (title, True, "  ".join(notes))
        print(_line(n))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(_line(n))
