"""Stopping rules and per-iteration convergence traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ConvergenceTrace", "StoppingRule", "TraceRow"]


@dataclass(frozen=True)
class StoppingRule:
    """Stop when the fixed-point residual drops to ``tol`` or the budget ends.

    ``tol = inf`` means "do not iterate at all" and is useful for probing
    initial states.
    """

    tol: float = 1e-10
    max_iters: int = 1_000_000

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    fp_residual: float
    consensus_gap_x: float | None = None
    consensus_gap_y: float | None = None
    distance_to_reference: float | None = None
    messages_cum: int | None = None


_COLUMNS = (
    "iteration",
    "fp_residual",
    "consensus_gap_x",
    "consensus_gap_y",
    "distance_to_reference",
    "messages_cum",
)


class ConvergenceTrace:
    """Append-only record of one solver run.

    Iteration numbers must increase strictly and residuals are nonnegative;
    optional columns are per-row and simply left blank in the CSV when
    absent.
    """

    def __init__(self):
        self.rows = []
        self.converged = False

    def append(self, row):
        if row.fp_residual < 0 or math.isnan(row.fp_residual):
            raise ValueError("fp_residual must be a nonnegative number")
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise ValueError("iterations must be strictly increasing")
        self.rows.append(row)

    @property
    def iterations(self):
        return self.rows[-1].iteration if self.rows else 0

    @property
    def final_residual(self):
        return self.rows[-1].fp_residual if self.rows else float("inf")

    def active_columns(self):
        cols = ["iteration", "fp_residual"]
        for name in _COLUMNS[2:]:
            if any(getattr(r, name) is not None for r in self.rows):
                cols.append(name)
        return cols

    def csv_lines(self, every=1):
        """CSV serialization, optionally subsampled to every ``every``-th row.

        The final row is always kept so the terminal state is never lost;
        subsampling changes which rows are written, never their content.
        """
        if every < 1:
            raise ValueError("every must be at least 1")
        cols = self.active_columns()
        lines = [",".join(cols)]
        last = len(self.rows) - 1
        for idx, row in enumerate(self.rows):
            if idx % every and idx != last:
                continue
            cells = []
            for name in cols:
                v = getattr(row, name)
                cells.append("" if v is None else (str(v) if isinstance(v, int) else repr(float(v))))
            lines.append(",".join(cells))
        return lines
