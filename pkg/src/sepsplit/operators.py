"""Operator catalog: single-valued maps (forward steps) and resolvents (backward steps).

Single-valued operators expose ``apply(x)``; operators that can play the role
of the set-valued part expose ``resolve(alpha, x)`` returning
``(I + alpha*B)^{-1}(x)``. ``Zero`` and ``LinearMonotone`` provide both.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .base import ConfigurationError, NumericalError, Report, as_vector

INF = math.inf


def _matrix(m, name):
    arr = np.array(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _frozen(v, dim=None, name="vector"):
    arr = as_vector(v, dim, name).copy()
    arr.setflags(write=False)
    return arr


def largest_eigenvalue(Q, tol=1e-15, max_iter=20000, seed=0):
    """Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration."""
    Q = np.asarray(Q, dtype=np.float64)
    n = Q.shape[0]
    if n == 0 or not np.any(Q):
        return 0.0
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = Q @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        lam_new = float(v_new @ Q @ v_new)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        v, lam = v_new, lam_new
    return lam


def _check_symmetric_part_psd(M, name):
    sym = 0.5 * (M + M.T)
    lo = np.linalg.eigvalsh(sym).min() if sym.size else 0.0
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if lo < -1e-12 * scale:
        raise ConfigurationError(f"{name} is not monotone: symmetric part has eigenvalue {lo:.3e}")


# --- single-valued operators ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class Zero:
    """The zero map on R^dim. Its resolvent is the identity."""

    dim: int
    kind = "zero"

    @property
    def beta(self):
        return INF

    @property
    def lipschitz(self):
        return 0.0

    def apply(self, x):
        return np.zeros(self.dim)

    def resolve(self, alpha, x):
        return np.array(x, dtype=np.float64, copy=True)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class LinearMonotone:
    """``x -> M x + offset`` with monotone ``M`` (positive semidefinite symmetric part).

    ``beta`` defaults to ``1/lambda_max(M)`` when ``M`` is symmetric and to
    ``None`` (not cocoercive) otherwise; ``lipschitz`` defaults to ``||M||_2``.
    """

    matrix: np.ndarray
    offset: np.ndarray | None = None
    beta: float | None = None
    lipschitz: float | None = None
    kind = "linear_monotone"

    def __post_init__(self):
        M = _matrix(self.matrix, "matrix")
        if M.shape[0] != M.shape[1]:
            raise ConfigurationError(f"matrix must be square, got {M.shape}")
        _check_symmetric_part_psd(M, "matrix")
        object.__setattr__(self, "matrix", M)
        if self.offset is not None:
            object.__setattr__(self, "offset", _frozen(self.offset, M.shape[0], "offset"))
        if self.beta is None and np.array_equal(M, M.T):
            lam = largest_eigenvalue(M)
            object.__setattr__(self, "beta", INF if lam == 0.0 else 1.0 / lam)
        if self.lipschitz is None:
            object.__setattr__(self, "lipschitz", float(np.linalg.norm(M, 2)))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply(self, x):
        out = self.matrix @ x
        if self.offset is not None:
            out = out + self.offset
        return out

    def resolve(self, alpha, x):
        rhs = x if self.offset is None else x - alpha * self.offset
        system = np.eye(self.dim) + alpha * self.matrix
        try:
            u = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"I + alpha*M is singular for alpha={alpha}") from exc
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"resolvent solve produced non-finite values for alpha={alpha}")
        return u

    def to_dict(self):
        d = {"kind": self.kind, "matrix": self.matrix.tolist()}
        if self.offset is not None:
            d["offset"] = self.offset.tolist()
        if self.beta is not None:
            d["beta"] = self.beta
        d["lipschitz"] = self.lipschitz
        return d


@dataclass(frozen=True, eq=False)
class Rotation2D:
    """The pi/2 rotation ``[[0, 1], [-1, 0]]`` on R^2: monotone, 1-Lipschitz, not cocoercive."""

    kind = "rotation2d"
    dim = 2
    beta = None
    lipschitz = 1.0

    def apply(self, x):
        return np.array([x[1], -x[0]])

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class ScaledIdentity:
    """``x -> c x`` with ``c >= 0``; (1/c)-cocoercive and c-Lipschitz."""

    c: float
    dim: int
    kind = "scaled_identity"

    def __post_init__(self):
        if not (self.c >= 0.0 and math.isfinite(self.c)):
            raise ConfigurationError(f"scale c must be finite and >= 0, got {self.c}")

    @property
    def beta(self):
        return INF if self.c == 0.0 else 1.0 / self.c

    @property
    def lipschitz(self):
        return float(self.c)

    def apply(self, x):
        return self.c * x

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class AffineGradient:
    """Gradient of ``0.5 x^T Q x - b^T x``, i.e. ``x -> Q x - b``, with ``Q`` symmetric PSD.

    The cocoercivity constant is ``1/lambda_max(Q)``, found by power iteration.
    """

    Q: np.ndarray
    b: np.ndarray | None = None
    beta: float = field(init=False)
    lipschitz: float = field(init=False)
    kind = "affine_gradient"

    def __post_init__(self):
        Q = _matrix(self.Q, "Q")
        if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ConfigurationError("Q must be a symmetric square matrix")
        _check_symmetric_part_psd(Q, "Q")
        object.__setattr__(self, "Q", Q)
        b = np.zeros(Q.shape[0]) if self.b is None else self.b
        object.__setattr__(self, "b", _frozen(b, Q.shape[0], "b"))
        lam = largest_eigenvalue(Q)
        object.__setattr__(self, "lipschitz", lam)
        object.__setattr__(self, "beta", INF if lam == 0.0 else 1.0 / lam)

    @property
    def dim(self):
        return self.Q.shape[0]

    def apply(self, x):
        return self.Q @ x - self.b

    def to_dict(self):
        return {"kind": self.kind, "Q": self.Q.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class Custom:
    """User-supplied evaluation rule.

    Cocoercivity and Lipschitz constants are declarations. Uniform continuity,
    needed when the operator is the monotone part, cannot be verified here;
    ``may_be_a2`` records that the caller vouches for it.
    """

    fn: Callable
    dim: int
    beta: float | None = None
    lipschitz: float | None = None
    may_be_a2: bool = False
    kind = "custom"

    def apply(self, x):
        return as_vector(self.fn(x), self.dim, "custom operator output")

    def to_dict(self):
        raise ConfigurationError("custom operators cannot be serialized")


# --- set-valued operators (resolvent only) -------------------------------------


@dataclass(frozen=True, eq=False)
class NormalConeBox:
    """Normal cone of the box ``[lo, hi]``; resolvent is the componentwise clamp."""

    lo: np.ndarray
    hi: np.ndarray
    kind = "normal_cone_box"

    def __post_init__(self):
        lo = _frozen(self.lo, name="lo")
        hi = _frozen(self.hi, lo.shape[0], "hi")
        if np.any(lo > hi):
            raise ConfigurationError("box has lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def resolve(self, alpha, x):
        return np.clip(x, self.lo, self.hi)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class NormalConeBall:
    """Normal cone of the closed ball; resolvent is radial projection."""

    center: np.ndarray
    radius: float
    kind = "normal_cone_ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center, name="center"))
        if not self.radius >= 0.0:
            raise ConfigurationError("radius must be >= 0")

    @property
    def dim(self):
        return self.center.shape[0]

    def resolve(self, alpha, x):
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return np.array(x, dtype=np.float64, copy=True)
        return self.center + (self.radius / nd) * d

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class NormalConeHalfspace:
    """Normal cone of ``{x : <v, x - y> <= r}``."""

    v: np.ndarray
    y: np.ndarray
    r: float = 0.0
    kind = "normal_cone_halfspace"

    def __post_init__(self):
        v = _frozen(self.v, name="v")
        if not np.any(v):
            raise ConfigurationError("halfspace normal must be nonzero")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "y", _frozen(self.y, v.shape[0], "y"))

    @property
    def dim(self):
        return self.v.shape[0]

    def resolve(self, alpha, x):
        excess = self.v @ (x - self.y) - self.r
        if excess <= 0.0:
            return np.array(x, dtype=np.float64, copy=True)
        return x - (excess / (self.v @ self.v)) * self.v

    def to_dict(self):
        return {"kind": self.kind, "v": self.v.tolist(), "y": self.y.tolist(), "r": self.r}


@dataclass(frozen=True, eq=False)
class NormalConeAffine:
    """Normal cone of ``{x : E x = d}``; resolvent is the least-squares projection."""

    E: np.ndarray
    d: np.ndarray
    kind = "normal_cone_affine"

    def __post_init__(self):
        E = _matrix(self.E, "E")
        d = _frozen(self.d, E.shape[0], "d")
        # consistency: the affine set must be nonempty
        x_min = np.linalg.lstsq(E, d, rcond=None)[0]
        if np.linalg.norm(E @ x_min - d) > 1e-9 * max(1.0, np.linalg.norm(d)):
            raise ConfigurationError("affine constraint E x = d is inconsistent")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "d", d)

    @property
    def dim(self):
        return self.E.shape[1]

    def resolve(self, alpha, x):
        return project_affine(self.E, self.d, x)

    def to_dict(self):
        return {"kind": self.kind, "E": self.E.tolist(), "d": self.d.tolist()}


@dataclass(frozen=True, eq=False)
class L1Subdifferential:
    """Subdifferential of ``weight * ||x||_1``; resolvent is soft-thresholding at ``alpha*weight``."""

    weight: float
    dim: int
    kind = "l1"

    def __post_init__(self):
        if not (self.weight >= 0.0 and math.isfinite(self.weight)):
            raise ConfigurationError("l1 weight must be finite and >= 0")

    def resolve(self, alpha, x):
        return soft_threshold(x, alpha * self.weight)

    def to_dict(self):
        return {"kind": self.kind, "weight": self.weight, "dim": self.dim}


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def project_affine(E, d, x):
    """Nearest point of ``{u : E u = d}`` to ``x``."""
    correction = np.linalg.lstsq(E, E @ x - d, rcond=None)[0]
    return x - correction


SINGLE_KINDS = {
    "zero": lambda d: Zero(int(d["dim"])),
    "linear_monotone": lambda d: LinearMonotone(
        d["matrix"], d.get("offset"), d.get("beta"), d.get("lipschitz")
    ),
    "rotation2d": lambda d: Rotation2D(),
    "scaled_identity": lambda d: ScaledIdentity(float(d["c"]), int(d["dim"])),
    "affine_gradient": lambda d: AffineGradient(d["Q"], d.get("b")),
}

SET_KINDS = {
    "zero": SINGLE_KINDS["zero"],
    "linear_monotone": SINGLE_KINDS["linear_monotone"],
    "normal_cone_box": lambda d: NormalConeBox(d["lo"], d["hi"]),
    "normal_cone_ball": lambda d: NormalConeBall(d["center"], float(d["radius"])),
    "normal_cone_halfspace": lambda d: NormalConeHalfspace(d["v"], d["y"], float(d.get("r", 0.0))),
    "normal_cone_affine": lambda d: NormalConeAffine(d["E"], d["d"]),
    "l1": lambda d: L1Subdifferential(float(d["weight"]), int(d["dim"])),
}


def _from_dict(table, d, role):
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise ConfigurationError(f"{role} operator needs a 'kind' entry") from None
    if kind not in table:
        raise ConfigurationError(f"unknown {role} operator kind {kind!r}; expected one of {sorted(table)}")
    try:
        return table[kind](d)
    except KeyError as exc:
        raise ConfigurationError(f"{role} operator of kind {kind!r} is missing field {exc}") from None


def single_from_dict(d):
    return _from_dict(SINGLE_KINDS, d, "single-valued")


def set_from_dict(d):
    return _from_dict(SET_KINDS, d, "set-valued")


# --- evaluation ------------------------------------------------------------------


def eval_single(op, x):
    """Evaluate a single-valued operator at ``x`` (forward step)."""
    x = as_vector(x, op.dim)
    return op.apply(x)


def resolvent(op, alpha, x):
    """Evaluate ``J_{alpha B}(x) = (I + alpha B)^{-1}(x)`` (backward step)."""
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ConfigurationError(f"resolvent step alpha must be positive and finite, got {alpha}")
    x = as_vector(x, op.dim)
    return op.resolve(alpha, x)


def check_firm_nonexpansiveness(op, alpha, sample_pairs, tol=1e-10):
    """Largest sampled violation of ``||Jx-Jy||^2 + ||(I-J)x-(I-J)y||^2 <= ||x-y||^2``."""
    if len(sample_pairs) == 0:
        raise ConfigurationError("need at least one sample pair")
    worst = -INF
    for x, y in sample_pairs:
        x = as_vector(x, op.dim)
        y = as_vector(y, op.dim)
        jx = resolvent(op, alpha, x)
        jy = resolvent(op, alpha, y)
        d = jx - jy
        e = (x - jx) - (y - jy)
        worst = max(worst, float(d @ d + e @ e - (x - y) @ (x - y)))
    return Report("firm_nonexpansiveness", worst <= tol, worst, tol, f"{op.kind}, alpha={alpha:g}")


def check_monotone_sampled(op, samples, tol=1e-12):
    """Smallest sampled ``<Ax - Ay, x - y>``; monotone on the sample iff it is >= -tol."""
    if len(samples) == 0:
        raise ConfigurationError("need at least one sample pair")
    lowest = INF
    for x, y in samples:
        x = as_vector(x, op.dim)
        y = as_vector(y, op.dim)
        lowest = min(lowest, float((op.apply(x) - op.apply(y)) @ (x - y)))
    return Report("monotonicity", lowest >= -tol, lowest, tol, op.kind)


def random_pairs(rng, dim, n, scale=3.0):
    """``n`` pairs of Gaussian points in R^dim, for sampled property checks."""
    return [(scale * rng.standard_normal(dim), scale * rng.standard_normal(dim)) for _ in range(n)]
