"""End-to-end tests of the command-line front end (exit codes and artifacts)."""

import numpy as np
import pytest

from saddlenet.cli import main

FAST_MINMAX = """
[problem]
n = 3
p = 1
d = 1
coupling = quadratic
seed = 0

[graph]
topology = ring

[algorithm]
name = alg2

[run]
max_iters = 20000
tol = 1e-10
"""

SKEW_COMPARE = """
[problem]
n = 3
p = 1
d = 1
coupling_m = 1.0
x0 = 1.0
y0 = 1.0

[graph]
topology = ring

[algorithm]
name = pdtr, condat_vu

[run]
max_iters = 3000
tol = 1e-6
"""


def write(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def swap(text, old, new):
    assert old in text
    return text.replace(old, new)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def test_run_writes_artifacts_and_exits_zero(tmp_path):
    cfg = write(tmp_path, FAST_MINMAX)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0

    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0].startswith("iteration,fp_residual")
    assert len(trace) > 2
    last = trace[-1].split(",")
    assert float(last[1]) <= 1e-10

    solution = (out / "solution.csv").read_text().splitlines()
    assert solution[0] == "block,index,value"
    assert any(line.startswith("x,0,") for line in solution)
    assert any(line.startswith("y,0,") for line in solution)

    summary = (out / "summary.txt").read_text()
    assert "algorithm = alg2" in summary
    assert "converged = yes" in summary
    assert "messages per round = " in summary


def test_run_exit_three_when_budget_runs_out(tmp_path):
    cfg = write(tmp_path, FAST_MINMAX)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--max-iters", "3"]) == 3
    summary = (out / "summary.txt").read_text()
    assert "converged = no" in summary
    assert "iterations = 3" in summary
    # artifacts are written even for unconverged runs
    assert (out / "trace.csv").exists()
    assert (out / "solution.csv").exists()


def test_run_rejects_unknown_algorithm(tmp_path, capsys):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = admm"))
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_rejects_multiple_algorithms(tmp_path, capsys):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = alg2, alg1"))
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "exactly one algorithm" in capsys.readouterr().err


def test_run_premix_only_for_the_inclusion_methods(tmp_path, capsys):
    text = swap(FAST_MINMAX, "name = alg2", "name = alg2\ninit = premix")
    cfg = write(tmp_path, text)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "premix" in capsys.readouterr().err


def test_run_alg1_with_audit(tmp_path):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = alg1"))
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--audit"]) == 0

    audit = (out / "audit.csv").read_text().splitlines()
    assert audit[0] == "round,messages,bytes,illegal_attempts"
    # 3-ring: 3 edges, two messages per edge per round, zero illegal reads
    for line in audit[1:]:
        _, messages, _, illegal = line.split(",")
        assert messages == "6"
        assert illegal == "0"
    assert "illegal reads" in (out / "summary.txt").read_text()


def test_run_audit_on_centralized_algorithm_is_noted(tmp_path):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = pdtr"))
    out = tmp_path / "out"
    code = main(["run", "--config", cfg, "--out", str(out), "--audit"])
    assert code in (0, 3)
    assert not (out / "audit.csv").exists()
    assert "not applicable" in (out / "summary.txt").read_text()


def test_run_pg_extra_requires_pure_minimization(tmp_path, capsys):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = pg_extra"))
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "minimization" in capsys.readouterr().err


def test_run_pg_extra_on_minimization_config(tmp_path):
    text = """
[problem]
n = 3
p = 2
d = 0
prox_f = l1
prox_f_weight = 0.05
coupling = quadratic
seed = 1

[graph]
topology = ring

[algorithm]
name = pg_extra

[run]
max_iters = 50000
tol = 1e-10
"""
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    summary = (out / "summary.txt").read_text()
    assert "algorithm = pg_extra" in summary
    assert "converged = yes" in summary


def test_run_reference_distance_in_summary(tmp_path):
    cfg = write(tmp_path, swap(FAST_MINMAX, "tol = 1e-10", "tol = 1e-10\nreference = on"))
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    summary = (out / "summary.txt").read_text()
    assert "final distance to reference = " in summary
    dist = float(summary.split("final distance to reference = ")[1].splitlines()[0])
    assert dist < 1e-6


def test_seed_override_changes_the_instance(tmp_path):
    cfg = write(tmp_path, FAST_MINMAX)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(out1), "--seed-override", "1"]) == 0
    assert main(["run", "--config", cfg, "--out", str(out2), "--seed-override", "2"]) == 0
    assert (out1 / "solution.csv").read_text() != (out2 / "solution.csv").read_text()


def test_trace_every_subsamples_but_keeps_the_last_row(tmp_path):
    text = swap(FAST_MINMAX, "trace_every = 1" if "trace_every" in FAST_MINMAX
                else "tol = 1e-10", "tol = 1e-10\ntrace_every = 500")
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "trace.csv").read_text().splitlines()
    summary = (out / "summary.txt").read_text()
    total = int(summary.split("iterations = ")[1].splitlines()[0])
    assert len(lines) - 1 < total / 100
    assert lines[-1].split(",")[0] == str(total)


def test_forb_uses_its_own_auto_step(tmp_path):
    cfg = write(tmp_path, swap(FAST_MINMAX, "name = alg2", "name = forb"))
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert "summed objective" in (out / "summary.txt").read_text()


def test_missing_config_file_is_a_usage_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.ini"),
                 "--out", str(tmp_path / "o")]) == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# check-mixing
# ---------------------------------------------------------------------------

def triangle(tmp_path):
    path = tmp_path / "triangle.edges"
    path.write_text("0 1\n1 2\n0 2\n", encoding="utf-8")
    return str(path)


def test_check_mixing_metropolis_passes(tmp_path, capsys):
    assert main(["check-mixing", triangle(tmp_path), "--scheme", "metropolis"]) == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out


def test_check_mixing_laplacian_passes(tmp_path, capsys):
    # lambda_max of the triangle laplacian is 3; any alpha above 1.5 works
    assert main(["check-mixing", triangle(tmp_path), "--scheme", "laplacian",
                 "--alpha", "3.0"]) == 0
    assert "overall: PASS" in capsys.readouterr().out


def test_check_mixing_boundary_alpha_fails_spectral(tmp_path, capsys):
    assert main(["check-mixing", triangle(tmp_path), "--scheme", "laplacian",
                 "--alpha", "1.5"]) == 1
    out = capsys.readouterr().out
    assert "overall: FAIL" in out


def test_check_mixing_identity_fails_kernel(tmp_path, capsys):
    mf = tmp_path / "identity.csv"
    mf.write_text("1,0,0\n0,1,0\n0,0,1\n", encoding="utf-8")
    assert main(["check-mixing", triangle(tmp_path), "--matrix-file", str(mf)]) == 1
    out = capsys.readouterr().out
    assert "overall: FAIL" in out


def test_check_mixing_disconnected_graph(tmp_path, capsys):
    path = tmp_path / "disc.edges"
    path.write_text("n 4\n0 1\n", encoding="utf-8")
    assert main(["check-mixing", str(path), "--scheme", "metropolis"]) == 2
    assert "not connected" in capsys.readouterr().err


def test_check_mixing_missing_file(tmp_path, capsys):
    assert main(["check-mixing", str(tmp_path / "nope.edges"),
                 "--scheme", "metropolis"]) == 2
    assert "cannot read graph" in capsys.readouterr().err


def test_check_mixing_needs_a_source(tmp_path, capsys):
    assert main(["check-mixing", triangle(tmp_path)]) == 2
    assert "--scheme" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_passes_on_a_generic_instance(tmp_path, capsys):
    cfg = write(tmp_path, FAST_MINMAX)
    assert main(["verify", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "verify: PASS" in out
    assert out.count("pass") >= 5


def test_verify_other_seed(tmp_path, capsys):
    cfg = write(tmp_path, FAST_MINMAX)
    assert main(["verify", "--config", cfg, "--seed-override", "7"]) == 0
    assert "verify: PASS" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def test_compare_skew_instance(tmp_path, capsys):
    cfg = write(tmp_path, SKEW_COMPARE)
    out = tmp_path / "cmp"
    assert main(["compare", "--config", cfg, "--out", str(out)]) == 0

    stdout = capsys.readouterr().out
    assert "pdtr" in stdout and "condat_vu" in stdout
    assert "NOT CONVERGED" in stdout

    summary = (out / "summary.txt").read_text()
    pdtr_line = next(l for l in summary.splitlines() if l.startswith("pdtr"))
    cv_line = next(l for l in summary.splitlines() if l.startswith("condat_vu"))
    assert "converged" in pdtr_line and "NOT CONVERGED" not in pdtr_line
    assert "NOT CONVERGED" in cv_line

    table = (out / "compare.csv").read_text().splitlines()
    assert table[0] == "iteration,fp_residual_pdtr,fp_residual_condat_vu"
    assert len(table) > 2


def test_compare_needs_at_least_two_algorithms(tmp_path, capsys):
    cfg = write(tmp_path, swap(SKEW_COMPARE, "name = pdtr, condat_vu", "name = pdtr"))
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "at least two" in capsys.readouterr().err


def test_compare_exit_three_when_nothing_converges(tmp_path):
    cfg = write(tmp_path, swap(SKEW_COMPARE, "name = pdtr, condat_vu",
                               "name = condat_vu, condat_vu"))
    out = tmp_path / "o"
    assert main(["compare", "--config", cfg, "--out", str(out),
                 "--max-iters", "50"]) == 3
