"""Backtracking search for the stepsize and the forward-backward point."""

from dataclasses import dataclass

import numpy as np

from .base import ConfigurationError, LineSearchError

DEFAULT_MAX_TRIALS = 60


@dataclass(frozen=True, eq=False)
class LineSearchResult:
    """Accepted trial ``alpha_k = alpha_prev * theta**j_k`` and its point ``x_bar``.

    ``trials`` counts resolvent evaluations. ``a2x`` and ``a2x_bar`` are kept so
    callers can build the separating halfspace without re-evaluating ``A2``.
    """

    alpha_k: float
    j_k: int
    x_bar: np.ndarray
    trials: int
    a2x: np.ndarray
    a2x_bar: np.ndarray


def trial_point(problem, x, alpha, Ax=None):
    """``J_{alpha B}(x - alpha (A1 + A2) x)``."""
    if Ax is None:
        Ax = problem.A(x)
    return problem.b.resolve(alpha, x - alpha * Ax)


def acceptance_gap(alpha, x, x_bar, a2x, a2x_bar, delta):
    """``delta ||x - x_bar||^2 - alpha <A2x - A2x_bar, x - x_bar>``; accepted iff >= 0."""
    d = x - x_bar
    return delta * float(d @ d) - alpha * float((a2x - a2x_bar) @ d)


def backtrack(problem, x, alpha_prev, theta, delta, max_trials=DEFAULT_MAX_TRIALS):
    """Find the smallest ``j >= 0`` passing the acceptance test.

    With ``alpha = alpha_prev * theta**j`` and ``x_bar = J_{alpha B}(x - alpha A x)``
    the test is ``alpha <A2 x - A2 x_bar, x - x_bar> <= delta ||x - x_bar||^2``.

    Raises
    ------
    LineSearchError
        If no trial passes within ``max_trials`` resolvent evaluations, which
        points to a violated continuity assumption or bad scaling.
    """
    if not alpha_prev > 0.0:
        raise ConfigurationError(f"alpha_prev must be positive, got {alpha_prev}")
    if not 0.0 < theta < 1.0:
        raise ConfigurationError(f"theta must lie in (0, 1), got {theta}")
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    if max_trials < 1:
        raise ConfigurationError("max_trials must be positive")

    Ax = problem.A(x)
    a2x = problem.a2.apply(x)
    fixed_scale = 1e-14 * max(1.0, float(np.linalg.norm(x)))
    for j in range(max_trials):
        alpha = alpha_prev * theta**j
        x_bar = trial_point(problem, x, alpha, Ax)
        a2x_bar = problem.a2.apply(x_bar)
        if np.linalg.norm(x - x_bar) <= fixed_scale:
            # x is numerically a fixed point of the forward-backward map
            return LineSearchResult(alpha, j, x_bar, j + 1, a2x, a2x_bar)
        if acceptance_gap(alpha, x, x_bar, a2x, a2x_bar, delta) >= 0.0:
            return LineSearchResult(alpha, j, x_bar, j + 1, a2x, a2x_bar)
    raise LineSearchError(
        f"no acceptable stepsize after {max_trials} trials (last alpha={alpha:.3e})",
        trials=max_trials,
    )
