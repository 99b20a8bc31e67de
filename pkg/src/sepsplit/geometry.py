"""Halfspaces, the separating sets built each iteration, and exact projections."""

from dataclasses import dataclass

import numpy as np

from .base import InfeasibleError, as_vector

# feasibility slack relative to the size of the terms in <v, x - y> - r; no
# absolute floor, since near a solution the true separation margin is tiny
FEAS_TOL = 1e-12
# Gram matrices worse conditioned than this are treated as rank deficient
GRAM_COND_MAX = 1e14
# relative Cauchy-Schwarz gap below which two directions count as parallel
PARALLEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Halfspace:
    """The set ``{x : <v, x - y> <= r}``.

    A zero normal with ``r >= 0`` describes the whole space; ``degenerate`` is
    then true and projections are the identity.
    """

    v: np.ndarray
    y: np.ndarray
    r: float = 0.0

    @property
    def degenerate(self):
        return not np.any(self.v)

    @property
    def dim(self):
        return self.v.shape[0]

    def value(self, x):
        """Signed excess ``<v, x - y> - r``; positive outside."""
        return float(self.v @ (x - self.y) - self.r)

    def contains(self, x, tol=0.0):
        return self.value(x) <= tol

    def slack_scale(self, x):
        """Magnitude of the terms entering ``value``; rounding error in ``value`` is proportional to it."""
        return float(np.linalg.norm(self.v) * (np.linalg.norm(x) + np.linalg.norm(self.y))) + abs(self.r)

    def as_dict(self):
        return {"v": self.v.tolist(), "y": self.y.tolist(), "r": self.r}


@dataclass(frozen=True, eq=False)
class TwoHalfspaceProjection:
    """Nearest point of an intersection of two halfspaces, with KKT multipliers."""

    point: np.ndarray
    lambda1: float
    lambda2: float
    active_set: str  # "none", "T-only", "G-only" or "both"


class Converged(Exception):
    """Raised when the separating normal vanishes, meaning the iterate solves the inclusion."""


def build_Tk(x, x_bar, alpha_k, A2x, A2x_bar, delta_bar):
    """Separating halfspace for the current iterate.

    Normal ``w = (x - x_bar)/alpha_k - (A2x - A2x_bar)``, anchored at ``x_bar``
    with offset ``(delta_bar/alpha_k) ||x - x_bar||^2``. Raises ``Converged`` if
    the normal vanishes to working precision.
    """
    d = x - x_bar
    v = d / alpha_k - (A2x - A2x_bar)
    r = (delta_bar / alpha_k) * float(d @ d)
    if np.linalg.norm(v) <= 1e-14 * max(1.0, np.linalg.norm(x) / alpha_k):
        raise Converged("separating normal vanished")
    return Halfspace(v, np.array(x_bar, copy=True), r)


def build_Gammak(x0, xk):
    """``{x : <x0 - xk, x - xk> <= 0}``; the whole space when ``x0 == xk``."""
    return Halfspace(np.asarray(x0, dtype=np.float64) - xk, np.array(xk, dtype=np.float64, copy=True), 0.0)


def project_halfspace(h, w):
    """Metric projection of ``w`` onto ``h``."""
    if h.degenerate:
        return np.array(w, dtype=np.float64, copy=True)
    excess = h.value(w)
    if excess <= 0.0:
        return np.array(w, dtype=np.float64, copy=True)
    return w - (excess / float(h.v @ h.v)) * h.v


def _feasible(h, u, extent):
    """Membership up to rounding; ``extent`` bounds the norms of the terms that formed ``u``."""
    if h.degenerate:
        return True
    scale = float(np.linalg.norm(h.v)) * (extent + float(np.linalg.norm(h.y))) + abs(h.r)
    return h.value(u) <= FEAS_TOL * scale


def _single(h, x0):
    excess = h.value(x0)
    lam = excess / float(h.v @ h.v)
    return x0 - lam * h.v, lam


def _extent(x0, *terms):
    return float(np.linalg.norm(x0)) + sum(abs(c) * float(np.linalg.norm(v)) for c, v in terms)


def project_two_halfspaces(T, G, x0):
    """Nearest point of ``T ∩ G`` to ``x0`` by enumeration of active sets.

    Tried in order: neither constraint active, the parallel shortcut (``x0 - y_G``
    positively aligned with ``T.v`` and ``T`` inside ``G``), ``T`` alone, ``G``
    alone, both active through the 2x2 Gram system of the unit normals. The first candidate that is
    feasible with nonnegative multipliers is returned.
    """
    x0 = as_vector(x0, name="x0")
    n0 = float(np.linalg.norm(x0))
    if _feasible(T, x0, n0) and _feasible(G, x0, n0):
        return TwoHalfspaceProjection(x0.copy(), 0.0, 0.0, "none")

    if T.degenerate:
        T, G, swapped = G, T, True
    else:
        swapped = False

    def result(u, lam_t, lam_g, active):
        if swapped:
            lam_t, lam_g = lam_g, lam_t
            active = {"T-only": "G-only", "G-only": "T-only"}.get(active, active)
        return TwoHalfspaceProjection(u, float(lam_t), float(lam_g), active)

    if G.degenerate:
        u, lam = _single(T, x0)
        return result(u, lam, 0.0, "T-only")

    # parallel normals with T inside G: the answer is the projection onto T
    a, b = T.v, G.v
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    dot = float(a @ b)
    parallel = na * nb - dot <= PARALLEL_TOL * na * nb
    if parallel and T.value(x0) > 0.0:
        u, lam = _single(T, x0)
        if _feasible(G, u, _extent(x0, (lam, a))):
            return result(u, lam, 0.0, "T-only")

    candidates = []
    if T.value(x0) > 0.0:
        u, lam = _single(T, x0)
        candidates.append((u, lam, 0.0, "T-only"))
    if G.value(x0) > 0.0:
        u, lam = _single(G, x0)
        candidates.append((u, 0.0, lam, "G-only"))
    for u, lt, lg, active in candidates:
        ext = _extent(x0, (lt, a), (lg, b))
        if _feasible(T, u, ext) and _feasible(G, u, ext):
            return result(u, lt, lg, active)

    # unit normals, so the conditioning reflects the angle only and not the scales
    cos = dot / (na * nb)
    gram = np.array([[1.0, cos], [cos, 1.0]])
    if np.linalg.cond(gram) <= GRAM_COND_MAX:
        rhs = np.array([T.value(x0) / na, G.value(x0) / nb])
        mt, mg = np.linalg.solve(gram, rhs)
        if mt >= 0.0 and mg >= 0.0:
            u = x0 - (mt / na) * a - (mg / nb) * b
            ext = _extent(x0, (mt / na, a), (mg / nb, b))
            if _feasible(T, u, ext) and _feasible(G, u, ext):
                return result(u, mt / na, mg / nb, "both")
    elif candidates:
        # nearly parallel boundaries: fall back to the least violating single projection
        def violation(c):
            u, lt, lg, _ = c
            ext = _extent(x0, (lt, a), (lg, b))
            return max(
                T.value(u) / (na * (ext + np.linalg.norm(T.y)) + abs(T.r)),
                G.value(u) / (nb * (ext + np.linalg.norm(G.y)) + abs(G.r)),
            )

        best = min(candidates, key=violation)
        if violation(best) <= 1e3 * FEAS_TOL:
            return result(*best)
    raise InfeasibleError("no active set yields a feasible projection; T ∩ G appears empty")
