import numpy as np
import pytest

from saddlenet.trace import ConvergenceTrace, StoppingRule, TraceRow


def test_stopping_rule_defaults_and_validation():
    rule = StoppingRule()
    assert rule.tol == 1e-10
    assert rule.max_iters == 1_000_000
    with pytest.raises(ValueError):
        StoppingRule(tol=-1e-3)
    with pytest.raises(ValueError):
        StoppingRule(max_iters=-1)
    StoppingRule(tol=0.0)  # exact fixed points are a legitimate target
    StoppingRule(tol=np.inf)


def test_trace_append_validates_rows():
    trace = ConvergenceTrace()
    trace.append(TraceRow(iteration=1, fp_residual=0.5))
    with pytest.raises(ValueError):
        trace.append(TraceRow(iteration=1, fp_residual=0.1))  # not increasing
    with pytest.raises(ValueError):
        trace.append(TraceRow(iteration=2, fp_residual=-0.1))
    with pytest.raises(ValueError):
        trace.append(TraceRow(iteration=2, fp_residual=float("nan")))
    trace.append(TraceRow(iteration=2, fp_residual=0.0))
    assert trace.iterations == 2
    assert trace.final_residual == 0.0


def test_empty_trace_properties():
    trace = ConvergenceTrace()
    assert trace.iterations == 0
    assert trace.final_residual == float("inf")
    assert not trace.converged


def test_active_columns_tracks_what_was_recorded():
    trace = ConvergenceTrace()
    trace.append(TraceRow(iteration=1, fp_residual=1.0))
    assert trace.active_columns() == ["iteration", "fp_residual"]
    trace.append(TraceRow(iteration=2, fp_residual=0.5, consensus_gap_x=0.1))
    assert trace.active_columns() == ["iteration", "fp_residual", "consensus_gap_x"]


def test_csv_round_trips_floats_exactly():
    trace = ConvergenceTrace()
    values = [0.1 + 0.2, 1.0 / 3.0, 2.0 ** -52]
    for k, v in enumerate(values, start=1):
        trace.append(TraceRow(iteration=k, fp_residual=v))
    lines = trace.csv_lines()
    assert lines[0] == "iteration,fp_residual"
    for line, v in zip(lines[1:], values):
        _, cell = line.split(",")
        assert float(cell) == v  # repr round-trip


def test_csv_subsampling_keeps_first_and_final_rows():
    trace = ConvergenceTrace()
    for k in range(1, 11):
        trace.append(TraceRow(iteration=k, fp_residual=1.0 / k))
    lines = trace.csv_lines(every=4)
    iters = [int(line.split(",")[0]) for line in lines[1:]]
    assert iters == [1, 5, 9, 10]
    with pytest.raises(ValueError):
        trace.csv_lines(every=0)


def test_csv_blank_cells_for_missing_optionals():
    trace = ConvergenceTrace()
    trace.append(TraceRow(iteration=1, fp_residual=1.0, consensus_gap_x=0.5))
    trace.append(TraceRow(iteration=2, fp_residual=0.5))
    lines = trace.csv_lines()
    assert lines[1] == "1,1.0,0.5"
    assert lines[2] == "2,0.5,"
