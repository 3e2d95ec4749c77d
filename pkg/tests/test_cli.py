from __future__ import annotations

import pytest

from auditreg.cli import main
from auditreg.history import loads
from auditreg.workloads import SEPARATION_AUDIT_EMPTY, SEPARATION_AUDIT_READ


def _main(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- run -----------------------------------------------------------------------


def test_run_demo(capsys):
    code, out, _ = _main(capsys, "run", "--algorithm", "a3", "--script", "demo")
    assert code == 0
    loads(out).validate()


def test_run_same_seed_same_output(capsys):
    first = _main(capsys, "run", "--algorithm", "a5", "--seed", "42")
    second = _main(capsys, "run", "--algorithm", "a5", "--seed", "42")
    assert first == second and first[0] == 0


def test_run_records_format_includes_primitives(capsys):
    code, out, _ = _main(capsys, "run", "--algorithm", "a4", "--format", "records")
    assert code == 0 and "\tprim\t" in out
    loads(out)


def test_run_explicit_schedule(capsys):
    code, out, _ = _main(capsys, "run", "--algorithm", "a3", "--schedule", "1,0")
    assert code == 0
    assert len(loads(out).operations()) == 2


def test_run_workload_file(capsys, tmp_path):
    f = tmp_path / "w.txt"
    f.write_text("register R a7 writer=0 readers=1 auditors=0\nprocess 0: write 4; audit\nprocess 1: read\n")
    code, out, _ = _main(capsys, "run", "--script", str(f))
    assert code == 0 and len(loads(out).operations()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--algorithm", "a9"],
        ["run", "--schedule", "0,x"],
        ["run", "--schedule", "7"],
        ["run", "--script", "/nonexistent/file"],
        ["bogus"],
        [],
    ],
)
def test_run_usage_errors(capsys, argv):
    assert _main(capsys, *argv)[0] == 2


# -- explore -------------------------------------------------------------------


def test_explore_a3_exhaustive(capsys):
    code, out, _ = _main(capsys, "explore", "--algorithm", "a3", "--exhaustive")
    assert code == 0 and "rejected: 0" in out


def test_explore_a7_uses_definition_2(capsys):
    code, out, _ = _main(capsys, "explore", "--algorithm", "a7", "--random", "--count", "50")
    assert code == 0 and "definition: 2" in out


def test_explore_mutant_gives_counterexample(capsys):
    code, out, _ = _main(capsys, "explore", "--algorithm", "a4-mutant-nobitreset")
    assert code == 1
    assert "violation:" in out and "schedule:" in out
    body = "\n".join(line for line in out.splitlines() if line[:1].isdigit())
    loads(body).validate()


def test_explore_max_schedules_zero(capsys):
    assert _main(capsys, "explore", "--max-schedules", "0")[0] == 2


def test_explore_max_schedules_limits(capsys):
    code, out, _ = _main(capsys, "explore", "--algorithm", "a4", "--max-schedules", "5")
    assert code == 0 and out.startswith("explored: 5 ")


def test_explore_step_bound_exceeded(capsys):
    assert _main(capsys, "explore", "--algorithm", "a5", "--step-bound", "2")[0] == 2


def test_explore_generic_workload(capsys):
    code, _, _ = _main(capsys, "explore", "--algorithm", "a6", "--readers", "2", "--auditors", "1", "--random", "--count", "20")
    assert code == 0


# -- check ---------------------------------------------------------------------


@pytest.fixture
def separation(tmp_path):
    good = tmp_path / "read.txt"
    bad = tmp_path / "empty.txt"
    good.write_text(SEPARATION_AUDIT_READ)
    bad.write_text(SEPARATION_AUDIT_EMPTY)
    return good, bad


def test_check_separation_history(capsys, separation):
    good, bad = separation
    assert _main(capsys, "check", str(good), "--definition", "1")[0] == 0
    code, out, _ = _main(capsys, "check", str(bad), "--definition", "1")
    assert code == 1 and "completeness" in out
    assert _main(capsys, "check", str(bad), "--definition", "2")[0] == 0


def test_check_oracle_agrees(capsys, separation):
    good, bad = separation
    assert _main(capsys, "check", str(good), "--oracle")[0] == 0
    assert _main(capsys, "check", str(bad), "--oracle")[0] == 1


def test_check_truncated_file(capsys, separation, tmp_path):
    good, _ = separation
    lines = good.read_text().splitlines()
    cut = tmp_path / "cut.txt"
    cut.write_text("\n".join(lines[:-1]) + "\n" + lines[-1][:5] + "\n")
    code, _, err = _main(capsys, "check", str(cut))
    assert code == 2 and f"line {len(lines)}" in err


def test_check_missing_file(capsys):
    assert _main(capsys, "check", "/nonexistent/history")[0] == 2


def test_check_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(SEPARATION_AUDIT_READ))
    assert _main(capsys, "check", "-")[0] == 0


# -- consensus -----------------------------------------------------------------


def test_consensus_two_exhaustive(capsys):
    code, out, _ = _main(capsys, "consensus", "--two", "--inputs", "3,5", "--exhaustive")
    assert code == 0 and "violations: 0" in out


def test_consensus_n_random(capsys):
    code, out, _ = _main(capsys, "consensus", "--n", "3", "--seed", "7", "--count", "10000")
    assert code == 0 and "runs: 10000  violations: 0" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["consensus", "--two", "--inputs", "3,3"],
        ["consensus", "--two", "--inputs", "3"],
        ["consensus", "--two", "--inputs", "a,b"],
        ["consensus", "--n", "0"],
        ["consensus", "--two", "--backend", "a6"],
        ["consensus"],
    ],
)
def test_consensus_usage_errors(capsys, argv):
    assert _main(capsys, *argv)[0] == 2


# -- mutants -------------------------------------------------------------------


def test_mutants_all_rejected(capsys):
    code, out, _ = _main(capsys, "mutants")
    assert code == 0
    assert out.count("rejected after") == len(out.splitlines()) >= 4


def test_mutants_correct_algorithm_survives(capsys):
    code, out, _ = _main(capsys, "mutants", "a4")
    assert code == 1 and "a4: survived" in out


def test_mutants_unknown(capsys):
    assert _main(capsys, "mutants", "a9")[0] == 2
