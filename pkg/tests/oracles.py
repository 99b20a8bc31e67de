"""Independent reference computations used by the tests.

Nothing here calls into the package's projection or proximal code: the QP
oracle goes through cvxopt's interior-point solver and the proximal oracle
is a refined grid search.
"""

import numpy as np
from cvxopt import matrix, solvers

solvers.options.update(show_progress=False, abstol=1e-13, reltol=1e-13, feastol=1e-13, maxiters=200)


def qp_project(x0, normals, offsets, eq=None, eq_rhs=None):
    """argmin ||u - x0||^2 subject to <a_i, u> <= b_i (and ``eq u = eq_rhs``), with multipliers."""
    x0 = np.asarray(x0, dtype=float)
    A = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.asarray(offsets, dtype=float)
    extra = {}
    if eq is not None:
        extra = dict(A=matrix(np.atleast_2d(np.asarray(eq, dtype=float))), b=matrix(np.asarray(eq_rhs, dtype=float)))
    sol = solvers.qp(matrix(np.eye(x0.size)), matrix(-x0), matrix(A), matrix(b), **extra)
    if sol["status"] != "optimal":
        raise ArithmeticError(f"cvxopt status {sol['status']}")
    return np.array(sol["x"]).ravel(), np.array(sol["z"]).ravel()


def qp_project_halfspaces(x0, *halfspaces):
    hs = [h for h in halfspaces if np.any(h.v)]
    if not hs:
        return np.array(x0, dtype=float), np.zeros(0)
    return qp_project(x0, [h.v for h in hs], [float(h.v @ h.y + h.r) for h in hs])


def brute_force_project(x0, *halfspaces, tol=1e-9):
    """Nearest point of an intersection of halfspaces by trying every active subset.

    Each subset's equality-constrained projection comes from a least-squares
    solve; the closest candidate satisfying all constraints wins. No
    multiplier signs are used, so this shares no decision logic with the
    active-set code under test.
    """
    x0 = np.asarray(x0, dtype=float)
    hs = [h for h in halfspaces if np.any(h.v)]
    best = None
    for mask in range(1 << len(hs)):
        act = [h for i, h in enumerate(hs) if mask >> i & 1]
        if act:
            V = np.array([h.v for h in act])
            rhs = np.array([h.value(x0) for h in act])
            mu = np.linalg.lstsq(V @ V.T, rhs, rcond=None)[0]
            u = x0 - V.T @ mu
        else:
            u = x0.copy()
        if all(h.value(u) <= tol * h.slack_scale(u) for h in hs):
            d = float(np.linalg.norm(u - x0))
            if best is None or d < best[0]:
                best = (d, u)
    if best is None:
        raise ArithmeticError("no feasible active subset")
    return best[1]


def grid_prox_abs(x, t, levels=4, n=2001):
    """argmin_u t|u| + (u - x)^2 / 2 by repeatedly refined grid search."""
    lo, hi = -abs(x) - 1.0, abs(x) + 1.0
    for _ in range(levels):
        u = np.linspace(lo, hi, n)
        f = t * np.abs(u) + 0.5 * (u - x) ** 2
        i = int(np.argmin(f))
        h = u[1] - u[0]
        lo, hi = u[i] - 2 * h, u[i] + 2 * h
    # include 0 explicitly: the kink is where soft-thresholding lands most often
    cand = np.array([u[i], 0.0])
    f = t * np.abs(cand) + 0.5 * (cand - x) ** 2
    return float(cand[int(np.argmin(f))])


def projected_iteration(F, lo, hi, x, step, iters=200000, tol=1e-15):
    """x <- clip(x - step F(x)); converges for strongly monotone affine F and small step."""
    for _ in range(iters):
        x_new = np.clip(x - step * F(x), lo, hi)
        if np.linalg.norm(x_new - x) <= tol:
            return x_new
        x = x_new
    return x


def random_halfspace_pair(rng, n, kind="generic"):
    """Two halfspaces with nonempty intersection and a point to project.

    ``kind`` is "generic", "parallel" (nearly parallel normals pointing the same
    way) or "gamma" (G built like the anchored halfspace from ``x0`` and a point).
    """
    from sepsplit.geometry import Halfspace, build_Gammak

    z = rng.standard_normal(n)
    v1 = rng.standard_normal(n)
    v2 = rng.standard_normal(n)
    if kind == "parallel":
        v2 = v1 * rng.uniform(0.5, 2.0) + 1e-3 * rng.standard_normal(n)
    T = Halfspace(v1, z - rng.uniform(0.0, 1.0) * v1, float(rng.uniform(0.0, 1.0)))
    x0 = z + 2.0 * rng.standard_normal(n)
    if kind == "gamma":
        # xk between x0 and a point of T, so z-side of G meets T
        G = build_Gammak(x0, x0 + rng.uniform(0.1, 0.9) * (z - x0))
    else:
        G = Halfspace(v2, z, 0.0)
    return T, G, x0
