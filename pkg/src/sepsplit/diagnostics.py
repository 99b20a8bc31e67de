"""Executable checks of the convergence properties over solver traces.

Every check is a pure function of its inputs and returns a ``Report`` whose
``value`` is the measured slack, so drift stays visible even when passing.
"""

import math

import numpy as np

from .base import Report, as_vector
from .linesearch import acceptance_gap, trial_point
from .solvers import IterationState, SolverConfig, fbhf_step, method1_step, solve
from .trace import TraceRecord  # noqa: F401  (re-exported)

FEJER_TOL = 1e-10
BALL_TOL = 1e-8
FLOOR_TOL = 1e-15
FBHF_TOL = 1e-12
AUDIT_TOL = 1e-12
SEPARATION_TOL = 1e-10


def iterates(trace):
    """``x^0, x^1, ...`` as recorded, including the last produced iterate."""
    xs = [rec.x for rec in trace]
    if trace and trace[-1].x_next is not None:
        xs.append(trace[-1].x_next)
    return xs


def fejer_check(trace, x_star, tol=FEJER_TOL):
    """Largest one-step increase of the distance to ``x_star``."""
    x_star = as_vector(x_star, name="x_star")
    dists = [float(np.linalg.norm(x - x_star)) for x in iterates(trace)]
    if len(dists) < 2:
        return Report("fejer", True, -math.inf, tol, "fewer than two iterates")
    worst = max(b - a for a, b in zip(dists, dists[1:]))
    return Report("fejer", worst <= tol, worst, tol, f"{len(dists)} iterates")


def ball_check(trace, x0, x_bar_star, tol=BALL_TOL, asserted=True):
    """Largest excess of ``||x^k - (x0 + x_bar)/2||`` over ``||x0 - x_bar||/2``.

    With ``asserted=False`` the report is informational (used for traces of
    methods the bound does not apply to).
    """
    x0 = as_vector(x0, name="x0")
    x_bar_star = as_vector(x_bar_star, x0.shape[0], "x_bar_star")
    mid = 0.5 * (x0 + x_bar_star)
    radius = 0.5 * float(np.linalg.norm(x0 - x_bar_star))
    worst = max(float(np.linalg.norm(x - mid)) - radius for x in iterates(trace))
    passed = worst <= tol if asserted else None
    return Report("ball", passed, worst, tol, f"radius={radius:.3e}")


def separation_check(trace, solutions, tol=SEPARATION_TOL, residual_tol=0.0):
    """Known solutions lie in every ``T_k`` and ``Γ_k``; each iterate lies outside its ``T_k``.

    ``value`` is the largest relative excess of a solution over a halfspace
    boundary; the iterate-side failures are counted in ``detail``.
    """
    worst = -math.inf
    inside = 0
    checked = 0
    for rec in trace:
        if rec.T is None:
            continue
        checked += 1
        for x_star in solutions:
            for h in (rec.T, rec.G):
                if h is None or h.degenerate:
                    continue
                scale = h.slack_scale(x_star)
                worst = max(worst, h.value(x_star) / scale if scale > 0 else h.value(x_star))
        if rec.residual > residual_tol and rec.T.value(rec.x) <= 0.0:
            inside += 1
    if checked == 0:
        return Report("separation", True, -math.inf, tol, "no halfspaces recorded")
    passed = worst <= tol and inside == 0
    return Report("separation", passed, worst, tol, f"{checked} halfspaces, {inside} iterates not separated")


def grid_floor(alpha_init, theta, bound):
    """Largest ``alpha_init * theta**n`` not exceeding ``bound`` (``alpha_init`` itself if below)."""
    if alpha_init <= bound:
        return alpha_init
    n = 0
    while alpha_init * theta**n > bound:
        n += 1
    return alpha_init * theta**n


def stepsize_floor_check(trace, L2, alpha_init, delta, tol=FLOOR_TOL, theta=None):
    """Smallest ``alpha_k`` minus ``min(alpha_init, delta/L2)``.

    Passing ``theta`` checks the floor actually guaranteed by backtracking on
    the grid ``alpha_init * theta**n``: the largest grid point not above
    ``min(alpha_init, delta/L2)``.
    """
    bound = alpha_init if L2 <= 0.0 else min(alpha_init, delta / L2)
    name = "stepsize_floor"
    if theta is not None:
        bound = grid_floor(alpha_init, theta, bound)
        name = "stepsize_grid_floor"
    if not trace:
        return Report(name, True, math.inf, tol, "empty trace")
    slack = min(rec.alpha for rec in trace) - bound
    return Report(name, slack >= -tol, slack, tol, f"floor={bound:.6g}")


def fbhf_equivalence_check(problem, x0, alpha_seq, tol=FBHF_TOL):
    """Relaxed-projection steps with multiplier ``alpha_k`` against FBHF steps, same stepsizes."""
    x_proj = as_vector(x0, problem.dim, "x0").copy()
    x_fbhf = x_proj.copy()
    worst = 0.0
    for k, alpha in enumerate(alpha_seq):
        x_bar = trial_point(problem, x_proj, alpha)
        a2x, a2x_bar = problem.a2.apply(x_proj), problem.a2.apply(x_bar)
        d = x_proj - x_bar
        w2 = d / alpha - (a2x - a2x_bar)
        state = IterationState(k, x_proj, x_bar, alpha, 0, w2, 0.0, float(np.linalg.norm(d)))
        x_proj = method1_step(problem, state, gamma=1.0, lam=alpha)
        x_fbhf = fbhf_step(problem, x_fbhf, alpha)
        worst = max(worst, float(np.linalg.norm(x_proj - x_fbhf)))
    return Report("fbhf_equivalence", worst <= tol, worst, tol, f"{len(alpha_seq)} steps")


def linesearch_audit(trace, problem, config, tol=AUDIT_TOL):
    """Re-verify the acceptance inequality and the minimality of ``j`` on every record."""
    worst = math.inf
    not_minimal = 0
    for rec in trace:
        x_bar = trial_point(problem, rec.x, rec.alpha)
        gap = acceptance_gap(rec.alpha, rec.x, x_bar, problem.a2.apply(rec.x), problem.a2.apply(x_bar), config.delta)
        worst = min(worst, gap)
        if rec.j > 0:
            alpha_before = rec.alpha_prev * config.theta ** (rec.j - 1)
            xb = trial_point(problem, rec.x, alpha_before)
            if acceptance_gap(alpha_before, rec.x, xb, problem.a2.apply(rec.x), problem.a2.apply(xb), config.delta) >= 0.0:
                not_minimal += 1
    if not trace:
        return Report("linesearch_audit", True, math.inf, tol, "empty trace")
    passed = worst >= -tol and not_minimal == 0
    return Report("linesearch_audit", passed, worst, tol, f"{len(trace)} records, {not_minimal} non-minimal j")


def monitored_quantity(trace, problem, config):
    """``<x - x_bar - alpha (A2x - A2x_bar), x - x_bar> - delta_bar ||x - x_bar||^2`` per record.

    It tends to zero along Method 1 runs; no rate is known, so it is logged only.
    """
    out = []
    for rec in trace:
        d = rec.x - rec.x_bar
        corr = rec.alpha * (problem.a2.apply(rec.x) - problem.a2.apply(rec.x_bar))
        out.append(float((d - corr) @ d) - config.delta_bar * float(d @ d))
    return out


def known_solutions(problem, x0, rng, n=4):
    """Sample points of the known solution set, always including the nearest one to ``x0``."""
    sol = problem.solution
    pts = [sol.project(x0)] + sol.sample(rng, n)
    return pts


def run_checks(problem, config=None, seed=0, x0=None):
    """Run both separating-hyperplane methods and every applicable check.

    Checks that need a known solution are reported as skipped when the
    problem's solution set is unknown.
    """
    config = config or SolverConfig(max_iter=2000)
    rng = np.random.default_rng(seed)
    if x0 is None:
        x0 = 2.0 * rng.standard_normal(problem.dim)
    x0 = as_vector(x0, problem.dim, "x0")
    alpha_init = config.initial_alpha(problem)
    reports = []
    runs = {m: solve(problem, m, config, x0) for m in ("Method1", "Method2")}
    known = problem.solution is not None
    sols = known_solutions(problem, x0, rng) if known else []

    for method, res in runs.items():
        def tag(r):
            return r.__class__(f"{method}.{r.name}", r.passed, r.value, r.tol, r.detail, r.skipped)

        if res.status == "line_search_failed":
            reports.append(Report(f"{method}.run", False, math.nan, 0.0, res.message))
        reports.append(tag(linesearch_audit(res.trace, problem, config)))
        if problem.lipschitz2 is not None:
            reports.append(tag(stepsize_floor_check(res.trace, problem.lipschitz2, alpha_init, config.delta)))
            reports.append(
                tag(stepsize_floor_check(res.trace, problem.lipschitz2, alpha_init, config.delta, theta=config.theta))
            )
        if not known:
            for name in ("fejer", "separation", "ball"):
                reports.append(Report(f"{method}.{name}", None, math.nan, 0.0, "solution set unknown", skipped=True))
            continue
        x_bar = problem.solution.project(x0)
        if method == "Method1":
            reports.append(tag(max((fejer_check(res.trace, s) for s in sols), key=lambda r: r.value)))
        reports.append(tag(separation_check(res.trace, sols, residual_tol=config.tol)))
        reports.append(tag(ball_check(res.trace, x0, x_bar, asserted=(method == "Method2"))))

    steps = 50
    alpha = _fbhf_alpha(problem)
    reports.append(fbhf_equivalence_check(problem, x0, [alpha] * steps))
    return reports, runs


def _fbhf_alpha(problem):
    """A constant stepsize inside ``(0, min(beta, 1/(2 L2)))``."""
    bound = problem.beta
    if problem.lipschitz2:
        bound = min(bound, 1.0 / (2.0 * problem.lipschitz2))
    return 0.9 * bound if math.isfinite(bound) else 1.0
