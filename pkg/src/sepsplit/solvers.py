"""Outer iterations: the separating-hyperplane methods and the FB, FBF and FBHF baselines."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .base import ConfigurationError, LineSearchError, as_vector
from .linesearch import backtrack, trial_point
from .trace import TraceRecord

METHODS = ("FB", "FBF", "FBHF", "Method1", "Method2")
BASELINES = ("FB", "FBF", "FBHF")

STATUSES = ("converged", "detected_solution", "max_iter", "line_search_failed", "diverged")


class DetectedSolution(Exception):
    """The current iterate lies in its own separating halfspace, so it solves the problem."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by all methods.

    ``alpha_init=None`` resolves to ``min(1, 4 beta delta_bar)`` for the problem
    at hand. ``fixed_alpha`` is the constant stepsize of the baselines.
    """

    theta: float = 0.5
    delta: float = 0.5
    delta_bar: float = 0.25
    alpha_init: float | None = None
    gamma: float = 1.0
    tol: float = 1e-10
    max_iter: int = 10000
    max_trials: int = 60
    fixed_alpha: float | None = None

    def initial_alpha(self, problem):
        if self.alpha_init is not None:
            return self.alpha_init
        return min(1.0, 4.0 * problem.beta * self.delta_bar)

    def violations(self, problem=None, method="Method1"):
        """Names and descriptions of every violated constraint (empty when valid)."""
        bad = []

        def need(ok, name, text):
            if not ok:
                bad.append(f"{name}: {text}")

        need(0.0 < self.theta < 1.0, "theta", f"must lie in (0,1), got {self.theta}")
        need(0.0 < self.delta < 1.0, "delta", f"must lie in (0,1), got {self.delta}")
        need(self.delta_bar > 0.0, "delta_bar", f"must be positive, got {self.delta_bar}")
        need(
            1.0 - self.delta - self.delta_bar > 0.0,
            "1-delta-delta_bar>0",
            f"1 - {self.delta} - {self.delta_bar} = {1.0 - self.delta - self.delta_bar:g}",
        )
        need(0.0 < self.gamma < 2.0, "gamma", f"must lie in (0,2), got {self.gamma}")
        need(self.tol > 0.0, "tol", f"must be positive, got {self.tol}")
        need(self.max_iter >= 1, "max_iter", f"must be >= 1, got {self.max_iter}")
        need(self.max_trials >= 1, "max_trials", f"must be >= 1, got {self.max_trials}")
        if self.alpha_init is not None:
            need(self.alpha_init > 0.0 and math.isfinite(self.alpha_init), "alpha_init", f"must be positive, got {self.alpha_init}")
        if self.fixed_alpha is not None:
            need(self.fixed_alpha > 0.0 and math.isfinite(self.fixed_alpha), "fixed_alpha", f"must be positive, got {self.fixed_alpha}")
        if method not in METHODS:
            bad.append(f"method: unknown method {method!r}, expected one of {METHODS}")
        elif method in BASELINES:
            need(self.fixed_alpha is not None, "fixed_alpha", f"{method} needs a fixed stepsize")
        elif problem is not None and math.isfinite(problem.beta) and self.alpha_init is not None:
            bound = 4.0 * problem.beta * self.delta_bar
            need(self.alpha_init <= bound, "alpha_init<=4*beta*delta_bar", f"{self.alpha_init:g} > {bound:g}")
        return bad

    def validate(self, problem=None, method="Method1"):
        bad = self.violations(problem, method)
        if bad:
            raise ConfigurationError("invalid solver configuration: " + "; ".join(bad))


@dataclass(frozen=True, eq=False)
class IterationState:
    """Quantities of one accepted line search.

    ``w2 = (x - x_bar)/alpha - (A2 x - A2 x_bar)`` is the separating normal and
    ``r = (delta_bar/alpha) ||x - x_bar||^2`` its offset.
    """

    k: int
    x: np.ndarray
    x_bar: np.ndarray
    alpha: float
    j: int
    w2: np.ndarray
    r: float
    residual: float

    @property
    def halfspace(self):
        return geometry.Halfspace(self.w2, self.x_bar, self.r)

    @classmethod
    def from_points(cls, k, x, x_bar, alpha, j, a2x, a2x_bar, delta_bar):
        T = geometry.build_Tk(x, x_bar, alpha, a2x, a2x_bar, delta_bar)
        return cls(k, x, x_bar, alpha, j, T.v, T.r, float(np.linalg.norm(x - x_bar)))


@dataclass(eq=False)
class SolveResult:
    status: str
    final_x: np.ndarray
    iterations: int
    trace: list = field(default_factory=list)
    residual: float = math.nan
    message: str = ""
    method: str = ""
    x0: np.ndarray | None = None
    resolvent_calls: int = 0
    a1_evals: int = 0
    a2_evals: int = 0

    @property
    def succeeded(self):
        return self.status in ("converged", "detected_solution")


# --- single steps -------------------------------------------------------------------


def fb_step(problem, x, alpha):
    """``J_{alpha B}(x - alpha A x)``."""
    return trial_point(problem, x, alpha)


def fbf_step(problem, x, alpha):
    """Forward-backward-forward: correct the FB point with a second evaluation of ``A``."""
    Ax = problem.A(x)
    x_bar = trial_point(problem, x, alpha, Ax)
    return x_bar - alpha * (problem.A(x_bar) - Ax)


def fbhf_step(problem, x, alpha):
    """Forward-backward-half-forward: the correction re-evaluates only ``A2``."""
    x_bar = trial_point(problem, x, alpha)
    return x_bar - alpha * (problem.a2.apply(x_bar) - problem.a2.apply(x))


def separation_multiplier(state):
    """Step length along ``-w2`` that lands on the separating hyperplane."""
    w2 = state.w2
    return (float(w2 @ (state.x - state.x_bar)) - state.r) / float(w2 @ w2)


def method1_step(problem, state, gamma=1.0, lam=None):
    """Relaxed projection of ``x`` onto the separating halfspace: ``x - gamma * lam * w2``.

    ``lam`` defaults to the exact projection multiplier; passing ``lam=alpha``
    with ``gamma=1`` reproduces the FBHF update.
    """
    if lam is None:
        lam = separation_multiplier(state)
        if not lam > 0.0:
            raise DetectedSolution(f"iterate lies in its separating halfspace (lambda={lam:.3e})")
    return state.x - (gamma * lam) * state.w2


def method2_projection(state, x0):
    G = geometry.build_Gammak(x0, state.x)
    return geometry.project_two_halfspaces(state.halfspace, G, x0), G


def method2_step(problem, state, x0):
    """Projection of the anchor ``x0`` onto ``T_k ∩ Γ_k``."""
    return method2_projection(state, x0)[0].point


# --- drivers ------------------------------------------------------------------------


def _dist(problem, x):
    if problem.solution is None:
        return None
    return float(np.linalg.norm(x - problem.solution.project(x)))


def solve(problem, method, config, x0):
    """Run ``method`` from ``x0`` until the natural residual drops below tolerance.

    The run stops when ``||x^k - x_bar^k|| <= tol * max(1, ||x^k||)``
    (status ``converged``), when the iterate is detected inside its own
    separating halfspace (``detected_solution``), after ``max_iter`` steps,
    on a line-search failure, or when iterates stop being finite
    (``diverged``).
    """
    config.validate(problem, method)
    x0 = as_vector(x0, problem.dim, "x0").copy()
    if method in BASELINES:
        return _solve_fixed(problem, method, config, x0)
    return _solve_conceptual(problem, method, config, x0)


def _solve_fixed(problem, method, config, x0):
    alpha = config.fixed_alpha
    x = x0
    res = SolveResult("max_iter", x, 0, method=method, x0=x0)
    for k in range(config.max_iter):
        Ax = problem.A(x)
        x_bar = trial_point(problem, x, alpha, Ax)
        res.resolvent_calls += 1
        res.a1_evals += 1
        res.a2_evals += 1
        residual = float(np.linalg.norm(x - x_bar))
        res.residual = residual
        if not math.isfinite(residual):
            res.status, res.message = "diverged", f"non-finite residual at k={k}"
            return res
        common = dict(k=k, x=x, x_bar=x_bar, alpha=alpha, alpha_prev=alpha, j=0, residual=residual, trials=1)
        if residual <= config.tol * max(1.0, float(np.linalg.norm(x))):
            res.trace.append(TraceRecord(**common, dist_to_solution=_dist(problem, x)))
            res.status, res.final_x, res.iterations = "converged", x, k
            return res
        if method == "FB":
            x_new = x_bar
        elif method == "FBF":
            x_new = x_bar - alpha * (problem.A(x_bar) - Ax)
            res.a1_evals += 1
            res.a2_evals += 1
        else:
            x_new = x_bar - alpha * (problem.a2.apply(x_bar) - problem.a2.apply(x))
            res.a2_evals += 2
        res.trace.append(TraceRecord(**common, x_next=x_new, dist_to_solution=_dist(problem, x)))
        x = x_new
        res.final_x, res.iterations = x, k + 1
        if not np.all(np.isfinite(x)):
            res.status, res.message = "diverged", f"non-finite iterate at k={k + 1}"
            return res
    res.message = f"stopped after max_iter={config.max_iter} steps"
    return res


def _solve_conceptual(problem, method, config, x0):
    x = x0
    alpha_prev = config.initial_alpha(problem)
    res = SolveResult("max_iter", x, 0, method=method, x0=x0)
    for k in range(config.max_iter):
        try:
            ls = backtrack(problem, x, alpha_prev, config.theta, config.delta, config.max_trials)
        except LineSearchError as exc:
            exc.iteration = k
            res.status, res.message = "line_search_failed", f"iteration {k}: {exc}"
            res.resolvent_calls += config.max_trials
            return res
        res.resolvent_calls += ls.trials
        res.a1_evals += 1
        res.a2_evals += 1 + ls.trials
        residual = float(np.linalg.norm(x - ls.x_bar))
        res.residual = residual
        if not math.isfinite(residual):
            res.status, res.message = "diverged", f"non-finite residual at k={k}"
            return res
        common = dict(
            k=k, x=x, x_bar=ls.x_bar, alpha=ls.alpha_k, alpha_prev=alpha_prev, j=ls.j_k, residual=residual, trials=ls.trials
        )
        dist = _dist(problem, x)
        if residual <= config.tol * max(1.0, float(np.linalg.norm(x))):
            res.trace.append(TraceRecord(**common, dist_to_solution=dist))
            res.status, res.final_x, res.iterations = "converged", x, k
            return res
        try:
            state = IterationState.from_points(k, x, ls.x_bar, ls.alpha_k, ls.j_k, ls.a2x, ls.a2x_bar, config.delta_bar)
            T = state.halfspace
            if method == "Method1":
                lam = separation_multiplier(state)
                x_new = method1_step(problem, state, config.gamma)
                G = None
                extra = dict(lambda_k=lam)
            else:
                proj, G = method2_projection(state, x0)
                x_new = proj.point
                extra = dict(lambda1=proj.lambda1, lambda2=proj.lambda2)
        except (geometry.Converged, DetectedSolution) as exc:
            res.trace.append(TraceRecord(**common, dist_to_solution=dist))
            res.status, res.final_x, res.iterations = "detected_solution", x, k
            res.message = str(exc)
            return res
        res.trace.append(
            TraceRecord(
                **common,
                **extra,
                x_next=x_new,
                dist_to_solution=dist,
                in_Tk=T.contains(x),
                in_Gammak=None if G is None else G.contains(x_new, 1e-10 * G.slack_scale(x_new)),
                T=T,
                G=G,
            )
        )
        x = x_new
        alpha_prev = ls.alpha_k
        res.final_x, res.iterations = x, k + 1
    res.message = f"stopped after max_iter={config.max_iter} steps"
    return res
