"""Separating-hyperplane splitting for ``0 ∈ A1 x + A2 x + B x``.

``A1`` is cocoercive, ``A2`` monotone and Lipschitz, ``B`` maximal monotone
and accessed through its resolvent. The two conceptual methods choose their
stepsize by backtracking and need neither constant in advance.
"""

from .base import (
    ConfigurationError,
    InfeasibleError,
    LineSearchError,
    NumericalError,
    Report,
    SepSplitError,
    UnsupportedError,
)
from .geometry import Halfspace, build_Gammak, build_Tk, project_halfspace, project_two_halfspaces
from .linesearch import backtrack
from .problems import ProblemInstance, get_problem, solution_project
from .solvers import METHODS, SolveResult, SolverConfig, solve

__all__ = [
    "ConfigurationError",
    "InfeasibleError",
    "LineSearchError",
    "NumericalError",
    "Report",
    "SepSplitError",
    "UnsupportedError",
    "Halfspace",
    "build_Tk",
    "build_Gammak",
    "project_halfspace",
    "project_two_halfspaces",
    "backtrack",
    "ProblemInstance",
    "get_problem",
    "solution_project",
    "METHODS",
    "SolveResult",
    "SolverConfig",
    "solve",
]
