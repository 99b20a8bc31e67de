"""Per-iteration trace records and their CSV form."""

import csv
import io
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = (
    "k",
    "residual",
    "alpha",
    "j",
    "trials",
    "dist_to_solution",
    "lambda_k",
    "lambda1",
    "lambda2",
    "in_Tk",
    "in_Gammak",
)


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """State of one outer iteration.

    ``x`` is the iterate the step starts from and ``x_next`` the iterate it
    produced (``None`` on the record where the run stopped). ``T`` and ``G``
    are the separating halfspace and the ``x0``-anchored halfspace, when the
    method builds them (``G`` only for Method 2). ``in_Tk`` tells whether ``x`` lies in ``T``;
    ``in_Gammak`` whether ``x_next`` lies in ``G``.
    """

    k: int
    x: np.ndarray
    x_bar: np.ndarray
    alpha: float
    alpha_prev: float
    j: int
    residual: float
    trials: int
    x_next: np.ndarray | None = None
    lambda_k: float | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    dist_to_solution: float | None = None
    in_Tk: bool | None = None
    in_Gammak: bool | None = None
    T: object = None
    G: object = None

    def csv_row(self):
        return [_fmt(getattr(self, name)) for name in CSV_COLUMNS]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # repr of a Python float is the shortest string that round-trips
    return repr(float(value))


def write_csv(trace, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in trace:
        writer.writerow(rec.csv_row())


def to_csv(trace):
    buf = io.StringIO()
    write_csv(trace, buf)
    return buf.getvalue()
