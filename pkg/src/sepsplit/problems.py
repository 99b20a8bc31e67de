"""Problem instances ``0 ∈ (A1 + A2 + B) x`` and a catalog with known solution sets."""

import math
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .base import ConfigurationError, UnsupportedError, as_vector

CERTIFY_PAIRS = 200
CERTIFY_TOL = 1e-10


# --- solution set descriptors ------------------------------------------------


@dataclass(frozen=True, eq=False)
class SinglePoint:
    point: np.ndarray
    kind = "point"

    def __post_init__(self):
        object.__setattr__(self, "point", as_vector(self.point, name="point").copy())

    def project(self, x):
        return self.point.copy()

    def sample(self, rng, n=5):
        return [self.point.copy()]

    def to_dict(self):
        return {"kind": self.kind, "point": self.point.tolist()}


@dataclass(frozen=True, eq=False)
class AffineSet:
    """``{x : E x = d}``."""

    E: np.ndarray
    d: np.ndarray
    kind = "affine"

    def __post_init__(self):
        object.__setattr__(self, "E", np.array(self.E, dtype=np.float64, ndmin=2))
        object.__setattr__(self, "d", as_vector(self.d, self.E.shape[0], "d").copy())

    def project(self, x):
        return ops.project_affine(self.E, self.d, x)

    def sample(self, rng, n=5):
        dim = self.E.shape[1]
        return [self.project(3.0 * rng.standard_normal(dim)) for _ in range(n)]

    def to_dict(self):
        return {"kind": self.kind, "E": self.E.tolist(), "d": self.d.tolist()}


@dataclass(frozen=True, eq=False)
class BoxAffine:
    """``{x : lo <= x <= hi, E x = d}``; projection by Dykstra's alternating scheme."""

    lo: np.ndarray
    hi: np.ndarray
    E: np.ndarray
    d: np.ndarray
    kind = "box_affine"

    def __post_init__(self):
        lo = as_vector(self.lo, name="lo").copy()
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", as_vector(self.hi, lo.shape[0], "hi").copy())
        object.__setattr__(self, "E", np.array(self.E, dtype=np.float64, ndmin=2))
        object.__setattr__(self, "d", as_vector(self.d, self.E.shape[0], "d").copy())

    def project(self, x, tol=1e-13, max_iter=100000):
        u = np.array(x, dtype=np.float64, copy=True)
        p = np.zeros_like(u)
        q = np.zeros_like(u)
        for _ in range(max_iter):
            y = ops.project_affine(self.E, self.d, u + p)
            p = u + p - y
            u_new = np.clip(y + q, self.lo, self.hi)
            q = y + q - u_new
            if np.linalg.norm(u_new - u) <= tol * max(1.0, np.linalg.norm(u)) and np.linalg.norm(
                self.E @ u_new - self.d
            ) <= 1e-11 * max(1.0, np.linalg.norm(self.d)):
                return u_new
            u = u_new
        return u

    def sample(self, rng, n=5):
        dim = self.lo.shape[0]
        return [self.project(3.0 * rng.standard_normal(dim)) for _ in range(n)]

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist(), "E": self.E.tolist(), "d": self.d.tolist()}


def solution_from_dict(d):
    if d is None or d.get("kind", "unknown") == "unknown":
        return None
    kind = d["kind"]
    if kind == "point":
        return SinglePoint(d["point"])
    if kind == "affine":
        return AffineSet(d["E"], d["d"])
    if kind == "box_affine":
        return BoxAffine(d["lo"], d["hi"], d["E"], d["d"])
    raise ConfigurationError(f"unknown solution descriptor kind {kind!r}")


# --- problem instance -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Find ``x`` with ``0 ∈ A1 x + A2 x + B x``.

    ``a1`` must be cocoercive (its ``beta`` may be ``inf`` for the zero map),
    ``a2`` monotone, ``b`` must provide a resolvent. ``solution`` is a
    descriptor of ``zer(A1+A2+B)`` or ``None`` when unknown. Declared
    constants are certified on random samples at construction.
    """

    name: str
    a1: object
    a2: object
    b: object
    solution: object = None
    certify: bool = True

    def __post_init__(self):
        dims = {self.a1.dim, self.a2.dim, self.b.dim}
        if len(dims) != 1:
            raise ConfigurationError(f"operator dimensions disagree: a1={self.a1.dim}, a2={self.a2.dim}, b={self.b.dim}")
        if not hasattr(self.b, "resolve"):
            raise ConfigurationError(f"b of kind {self.b.kind!r} has no resolvent")
        if self.a1.beta is None or not self.a1.beta > 0.0:
            raise ConfigurationError("a1 must declare a positive cocoercivity constant beta")
        if isinstance(self.a2, ops.Custom) and not self.a2.may_be_a2:
            raise ConfigurationError("custom operator used as a2 must set may_be_a2=True")
        if self.certify:
            rng = np.random.default_rng(20240601)
            pairs = ops.random_pairs(rng, self.dim, CERTIFY_PAIRS)
            certify_cocoercive(self.a1, self.a1.beta, pairs)
            if not ops.check_monotone_sampled(self.a2, pairs, tol=CERTIFY_TOL).passed:
                raise ConfigurationError("a2 failed the sampled monotonicity check")
            if self.a2.lipschitz is not None:
                certify_lipschitz(self.a2, self.a2.lipschitz, pairs)

    @property
    def dim(self):
        return self.a1.dim

    @property
    def beta(self):
        return self.a1.beta

    @property
    def lipschitz2(self):
        return self.a2.lipschitz

    def A(self, x):
        return self.a1.apply(x) + self.a2.apply(x)

    def to_dict(self):
        return {
            "name": self.name,
            "a1": self.a1.to_dict(),
            "a2": self.a2.to_dict(),
            "b": self.b.to_dict(),
            "solution": {"kind": "unknown"} if self.solution is None else self.solution.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        for key in ("a1", "a2", "b"):
            if key not in d:
                raise ConfigurationError(f"problem definition is missing '{key}'")
        return cls(
            d.get("name", "inline"),
            ops.single_from_dict(d["a1"]),
            ops.single_from_dict(d["a2"]),
            ops.set_from_dict(d["b"]),
            solution_from_dict(d.get("solution")),
        )


def certify_cocoercive(op, beta, pairs):
    for x, y in pairs:
        dA = op.apply(x) - op.apply(y)
        lhs = float(dA @ (x - y))
        if math.isinf(beta):
            if np.any(dA):
                raise ConfigurationError("operator with beta=inf must be constant")
            continue
        rhs = beta * float(dA @ dA)
        if lhs < rhs - CERTIFY_TOL * max(1.0, rhs):
            raise ConfigurationError(f"declared beta={beta:g} fails the sampled cocoercivity check ({lhs:.6e} < {rhs:.6e})")


def certify_lipschitz(op, L, pairs):
    for x, y in pairs:
        lhs = np.linalg.norm(op.apply(x) - op.apply(y))
        rhs = L * np.linalg.norm(x - y)
        if lhs > rhs + CERTIFY_TOL * max(1.0, rhs):
            raise ConfigurationError(f"declared Lipschitz constant {L:g} fails the sampled check")


def solution_project(problem, x):
    """Nearest solution to ``x``, from the problem's analytic descriptor."""
    if problem.solution is None:
        raise UnsupportedError(f"problem {problem.name!r} has no known solution set")
    return problem.solution.project(as_vector(x, problem.dim))


# --- catalog -----------------------------------------------------------------------


def rotation2d():
    return ProblemInstance("rotation2d", ops.Zero(2), ops.Rotation2D(), ops.Zero(2), SinglePoint([0.0, 0.0]))


def affine_grad():
    # A1 = gradient of x1^2 / 2, zeros form the line x1 = 0
    return ProblemInstance(
        "affine_grad",
        ops.AffineGradient([[1.0, 0.0], [0.0, 0.0]]),
        ops.Zero(2),
        ops.Zero(2),
        AffineSet([[1.0, 0.0]], [0.0]),
    )


def box_vip():
    # VI on [0,1]^2 with F(x) = M x + q; M x* = -q has the interior root (1/3, 1/3)
    return ProblemInstance(
        "box_vip",
        ops.Zero(2),
        ops.LinearMonotone([[2.0, 1.0], [1.0, 2.0]], offset=[-1.0, -1.0], lipschitz=3.0),
        ops.NormalConeBox([0.0, 0.0], [1.0, 1.0]),
        SinglePoint([1.0 / 3.0, 1.0 / 3.0]),
    )


SKEW = np.array([[0.0, 1.0, -0.5], [-1.0, 0.0, 2.0], [0.5, -2.0, 0.0]])


def skew_mix():
    # A1 x = c (x - p) is (1/c)-cocoercive; p is chosen so that x_star solves the
    # inclusion with normal vector n in N_box(x_star): upper face on x1, lower face on x3.
    c = 2.0
    x_star = np.array([1.0, 0.25, 0.0])
    n = np.array([0.5, 0.0, -0.3])
    p = x_star + (SKEW @ x_star + n) / c
    return ProblemInstance(
        "skew_mix",
        ops.AffineGradient(c * np.eye(3), c * p),
        ops.LinearMonotone(SKEW, lipschitz=float(np.linalg.norm(SKEW, 2))),
        ops.NormalConeBox(np.zeros(3), np.ones(3)),
        SinglePoint(x_star),
    )


LASSO_M = np.array(
    [
        [2.0, 0.0, 1.0, 0.0],
        [1.0, 3.0, 0.0, 1.0],
        [0.0, 1.0, 2.0, 0.0],
        [1.0, 0.0, 0.0, 2.0],
        [0.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 0.0],
    ]
)


def lasso_like():
    # b = Q x* + weight * s with s a subgradient of ||.||_1 at x* (strict on the zero entries)
    weight = 0.5
    Q = LASSO_M.T @ LASSO_M
    x_star = np.array([1.5, 0.0, -0.7, 0.0])
    s = np.array([1.0, 0.3, -1.0, -0.6])
    b = Q @ x_star + weight * s
    return ProblemInstance(
        "lasso_like",
        ops.AffineGradient(Q, b),
        ops.Zero(4),
        ops.L1Subdifferential(weight, 4),
        SinglePoint(x_star),
    )


def unknown_vip():
    M = np.array(
        [
            [1.0, 2.0, 0.0, -1.0],
            [-2.0, 0.5, 1.0, 0.0],
            [0.0, -1.0, 0.0, 3.0],
            [1.0, 0.0, -3.0, 0.2],
        ]
    )
    return ProblemInstance(
        "unknown_vip",
        ops.Zero(4),
        ops.LinearMonotone(M, offset=[1.0, -2.0, 0.5, 3.0]),
        ops.NormalConeBox(-np.ones(4), np.ones(4)),
        None,
    )


_BUILDERS = {
    "rotation2d": rotation2d,
    "affine_grad": affine_grad,
    "box_vip": box_vip,
    "skew_mix": skew_mix,
    "lasso_like": lasso_like,
    "unknown_vip": unknown_vip,
}


def catalog():
    """All catalog problems, in a fixed order."""
    return [build() for build in _BUILDERS.values()]


def names():
    return list(_BUILDERS)


def get_problem(name):
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown catalog problem {name!r}; choose from {names()}") from None
